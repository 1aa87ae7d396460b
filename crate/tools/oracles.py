"""Independent reference values for the Rust test suite (numpy/scipy)."""
import numpy as np
from scipy.integrate import quad_vec
from scipy.linalg import expm, solve_discrete_are
from scipy.optimize import brentq

np.set_printoptions(precision=17)


def second_order(alpha, zeta, w0):
    A = np.array([[0.0, 1.0], [-w0**2, -2 * alpha * zeta * w0]])
    B = np.array([[0.0], [w0**2]])
    return A, B


def gamma(A, B, t):
    if t == 0:
        return np.zeros_like(B)
    return quad_vec(lambda s: expm(A * s) @ B, 0, t, epsabs=1e-15, epsrel=1e-13)[0]


def qints(A, B, Qxx, Qxu, Quu, t):
    n, m = B.shape
    if t == 0:
        return np.zeros((n, n)), np.zeros((n, m)), np.zeros((m, m))
    def f(s):
        P = expm(A * s); G = gamma(A, B, s)
        xx = P.T @ Qxx @ P
        xu = P.T @ (Qxx @ G + Qxu)
        uu = G.T @ Qxx @ G + G.T @ Qxu + Qxu.T @ G + Quu
        return np.block([[xx, xu], [xu.T, uu]])
    Q = quad_vec(f, 0, t, epsabs=1e-15, epsrel=1e-12)[0]
    return Q[:n, :n], Q[:n, n:], Q[n:, n:]


def discretize(A, B, C, Rvc, Qxx, Qxu, Quu, h, tau):
    n, m = B.shape
    Eh = expm(A * h)
    Gh, Grest = gamma(A, B, h), gamma(A, B, h - tau)
    Phi = np.block([[Eh, Gh - Grest], [np.zeros((m, n)), np.zeros((m, m))]])
    Gam = np.vstack([Grest, np.eye(m)])
    Rv = quad_vec(lambda s: expm(A * s) @ Rvc @ expm(A * s).T, 0, h, epsabs=1e-15, epsrel=1e-13)[0]
    Pt, Gt = expm(A * tau), gamma(A, B, tau)
    a_xx, a_xu, a_uu = qints(A, B, Qxx, Qxu, Quu, tau)
    b_xx, b_xu, b_uu = qints(A, B, Qxx, Qxu, Quu, h - tau)
    Xxx = np.block([[a_xx + Pt.T @ b_xx @ Pt, a_xu + Pt.T @ b_xx @ Gt],
                    [a_xu.T + Gt.T @ b_xx @ Pt, a_uu + Gt.T @ b_xx @ Gt]])
    Xxu = np.vstack([Pt.T @ b_xu, Gt.T @ b_xu])
    Cx = np.hstack([C, np.zeros((C.shape[0], m))])
    G = np.vstack([np.eye(n), np.zeros((m, n))])
    return Phi, Gam, Cx, G @ Rv @ G.T, Rv, Xxx, Xxu, b_uu


print("== scalar MARE phi=1.2 rv=1 c=1 rw=1 rho=0.8")
f = lambda p: 1.44 * p + 1 - 0.8 * 1.44 * p * p / (p + 1) - p
pu = brentq(f, 0.1, 100)
pl = 1 / (1 - 0.2 * 1.44)
print("p_upper", repr(pu), "p_lower", repr(pl))
print("== scalar ARE phi=1.2 gamma=1 xi=1,1")
s = brentq(lambda s: 1.44 * s + 1 - 1.44 * s * s / (s + 1) - s, 0.1, 100)
delta = 1.44 * s + 1 - s
jmin = s * 1 + 0.2 * delta * pl
jmax = s * 1 + delta * (pu - 0.8 * pu * pu / (pu + 1))
print("S", repr(s), "L", repr(-1.2 * s / (s + 1)), "j_min", repr(jmin), "j_max", repr(jmax))

A, B = second_order(-1.0, 1.0, 1.0)
C = np.array([[1.0, 0.0]])
Rvc = 0.5 * np.eye(2)
Rw = np.array([[1e-4]])
Qxx = np.diag([2.0, 1.0]); Qxu = np.zeros((2, 1)); Quu = np.array([[1.0]])
for h, tau in [(0.25, 0.25), (0.25, 0.1)]:
    Phi, Gam, Cx, Rvt, Rv, Xxx, Xxu, Xuu = discretize(A, B, C, Rvc, Qxx, Qxu, Quu, h, tau)
    print(f"== plant h={h} tau={tau}")
    for name, M in [("phi", Phi), ("gamma", Gam), ("rv", Rv), ("xi_xx", Xxx), ("xi_xu", Xxu), ("xi_uu", Xuu)]:
        print(name, repr(M.tolist()))
    if Xuu[0, 0] > 1e-9:
        S = solve_discrete_are(Phi, Gam, Xxx, Xuu, s=Xxu)
        L = -np.linalg.solve(Gam.T @ S @ Gam + Xuu, Gam.T @ S @ Phi + Xxu.T)
        P = solve_discrete_are(Phi.T, Cx.T, Rvt + 1e-300 * np.eye(3), Rw)
        D = Phi.T @ S @ Phi + Xxx - S
        Ppost = P - P @ Cx.T @ np.linalg.solve(Cx @ P @ Cx.T + Rw, Cx @ P)
        print("S", repr(S.tolist()))
        print("L", repr(L.tolist()))
        print("classical j (rho=1)", repr(np.trace(S @ Rvt) + np.trace(D @ Ppost)), "j_min(rho=1)", repr(np.trace(S @ Rvt)))
