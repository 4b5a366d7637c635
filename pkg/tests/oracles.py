"""Independent reference computations used to freeze expected values.

Nothing here imports the package. Everything is written with explicit loops
over elements, following the model equations term by term.
"""
import cmath
import math

import numpy as np


def grid_pos(k, nx):
    # 1-based element index -> (i, j)
    return (k - 1) % nx, (k - 1) // nx


def response(nx, ny, dx, dy, lam, phi, theta):
    out = []
    for k in range(1, nx * ny + 1):
        i, j = grid_pos(k, nx)
        e = i * dx * math.cos(theta) * math.sin(phi) + j * dy * math.sin(theta)
        out.append(cmath.exp(2j * math.pi / lam * e))
    return out


def sinc_matrix(nx, ny, dx, dy, lam):
    n = nx * ny
    R = [[0.0] * n for _ in range(n)]
    for a in range(1, n + 1):
        ia, ja = grid_pos(a, nx)
        for b in range(1, n + 1):
            ib, jb = grid_pos(b, nx)
            x = 2 / lam * math.sqrt(dx**2 * (ia - ib) ** 2 + dy**2 * (ja - jb) ** 2)
            R[a - 1][b - 1] = 1.0 if x == 0 else math.sin(math.pi * x) / (math.pi * x)
    return R


def quad_form(R, h):
    total = 0j
    for a, ha in enumerate(h):
        for b, hb in enumerate(h):
            total += ha.conjugate() * R[a][b] * hb
    return total


def end_to_end_sum(h_d, T, h_r, beta):
    """h_m = h_d,m + sum_n exp(-j beta_n) h_r,n t_nm, evaluated by double loop."""
    M, N = len(h_d), len(h_r)
    return [
        h_d[m] + sum(cmath.exp(-1j * beta[n]) * h_r[n] * T[n][m] for n in range(N))
        for m in range(M)
    ]


def prop1(alpha_d_AM, alpha_r_AN, alpha_s_AN, kappa, rho, N, M, qf):
    ab = alpha_r_AN * alpha_s_AN / (1 + kappa)
    mu = alpha_d_AM + kappa * ab * N**2 + ab * qf
    eta = alpha_d_AM / M + ab * qf
    omega = 2 * kappa * ab * N**2 + ab * qf
    mu_C = math.log(1 + rho * M * mu, 2)
    sigma_C = rho * M * math.log(math.e, 2) / (1 + rho * M * mu) * math.sqrt(
        omega * eta + eta + (M - 1) / M * alpha_d_AM
    )
    return dict(mu=mu, eta=eta, omega=omega, mu_C=mu_C, sigma_C=sigma_C, alpha_bar=ab)


FIG1_ANGLES = dict(
    aoa=(math.pi / 6, math.pi / 3), aod_irs=(math.pi / 8, 2 * math.pi / 3), aod_tx=(math.pi / 7, math.pi / 5)
)


def fig1_reference():
    lam = 1.0
    d = lam / 2
    R = sinc_matrix(8, 32, d, d, lam)
    hb = response(8, 32, d, d, lam, *FIG1_ANGLES["aod_irs"])
    qf = quad_form(R, hb)
    stats = prop1(1.0, 1.0, 1.0, 1.0, 1.0, 256, 4, qf.real)
    stats["quad_form"] = qf.real
    stats["quad_form_imag"] = qf.imag
    stats["lambda_max"] = float(np.linalg.eigvalsh(np.array(R))[-1])
    return stats


def square_lambda_max(side, lam=1.0):
    R = sinc_matrix(side, side, lam / 2, lam / 2, lam)
    return float(np.linalg.eigvalsh(np.array(R))[-1])


if __name__ == "__main__":
    for k, v in fig1_reference().items():
        print(f"{k} = {v!r}")
    for side in range(8, 40, 4):
        print(side * side, repr(square_lambda_max(side)))
