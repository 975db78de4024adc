"""Spin Wigner quasi-probability function on the sphere.

The density matrix is decomposed over orthonormal irreducible tensor
operators T_kq (Tr(T_kq^dag T_k'q') = delta delta); the Wigner function is
W(theta, phi) = sqrt(2/pi) sum_kq Y_kq(theta, phi) rho_kq.  With this
normalization the sphere integral equals sqrt(8/d) Tr(rho), i.e. exactly 1
for the d = 8 system.  Spherical harmonics are evaluated with the
normalized associated-Legendre recurrence (Condon-Shortley phase).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._angular import clebsch_gordan
from .spincore import DensityMatrix, SpinQuantum, as_density_matrix


@dataclass(frozen=True)
class SphericalTensorBasis:
    """Orthonormal tensor operators, keyed by (k, q), k = 0..2I, q = -k..k."""

    two_I: int
    operators: dict

    @property
    def d(self) -> int:
        return self.two_I + 1


@lru_cache(maxsize=8)
def spherical_tensor_basis(two_I: int) -> SphericalTensorBasis:
    """T_kq = sqrt((2k+1)/d) sum_{m,m'} <I m; k q | I m'> |m'><m|."""
    d = two_I + 1
    ms = [two_I - 2 * j for j in range(d)]  # doubled m, descending
    ops: dict = {}
    for k in range(0, two_I + 1):
        norm = np.sqrt((2 * k + 1) / d)
        for q in range(-k, k + 1):
            t = np.zeros((d, d), dtype=complex)
            for col, two_m in enumerate(ms):
                two_mp = two_m + 2 * q
                if abs(two_mp) > two_I:
                    continue
                row = (two_I - two_mp) // 2
                t[row, col] = norm * clebsch_gordan(two_I, two_m, 2 * k, 2 * q, two_I, two_mp)
            ops[(k, q)] = t
    return SphericalTensorBasis(two_I=two_I, operators=ops)


def tensor_decompose(rho, q: SpinQuantum) -> dict:
    """Coefficients rho_kq = Tr(rho T_kq^dag); reconstruction is exact."""
    rho = as_density_matrix(rho)
    basis = spherical_tensor_basis(q.two_I)
    return {
        kq: complex(np.trace(rho.elements @ t.conj().T)) for kq, t in basis.operators.items()
    }


def tensor_reconstruct(coeffs: dict, q: SpinQuantum) -> np.ndarray:
    basis = spherical_tensor_basis(q.two_I)
    out = np.zeros((q.d, q.d), dtype=complex)
    for kq, c in coeffs.items():
        out += c * basis.operators[kq]
    return out


# ---------------------------------------------------------------------------
# spherical harmonics (normalized associated Legendre recurrence)


def _legendre_normalized(lmax: int, x: np.ndarray) -> np.ndarray:
    """P~_l^m(x) for 0 <= m <= l <= lmax, shape (lmax+1, lmax+1, *x.shape).

    Normalized so that Y_l^m = P~_l^m(cos theta) e^{i m phi}; includes the
    Condon-Shortley phase.  Stable upward recurrence in l at fixed m.
    """
    x = np.asarray(x, dtype=float)
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    out = np.zeros((lmax + 1, lmax + 1) + x.shape)
    out[0, 0] = np.sqrt(1.0 / (4.0 * np.pi))
    for m in range(1, lmax + 1):
        out[m, m] = -np.sqrt((2 * m + 1) / (2.0 * m)) * s * out[m - 1, m - 1]
    for m in range(0, lmax):
        out[m + 1, m] = np.sqrt(2 * m + 3.0) * x * out[m, m]
    for m in range(0, lmax + 1):
        for l in range(m + 2, lmax + 1):
            a = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            out[l, m] = a * (x * out[l - 1, m] - b * out[l - 2, m])
    return out


def spherical_harmonic(l: int, m: int, theta, phi) -> np.ndarray:
    """Y_l^m(theta, phi); Y_l^{-m} = (-1)^m conj(Y_l^m)."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    leg = _legendre_normalized(l, np.cos(theta))
    if m >= 0:
        return leg[l, m] * np.exp(1j * m * phi)
    return (-1.0) ** (-m) * leg[l, -m] * np.exp(1j * m * phi)


# ---------------------------------------------------------------------------
# Wigner evaluation


def wigner_value(rho, theta: float, phi: float, q: SpinQuantum, imag_tol: float = 1e-10) -> float:
    """W(theta, phi) = sqrt(2/pi) sum_kq Y_kq rho_kq, asserted real."""
    coeffs = tensor_decompose(rho, q)
    total = 0.0 + 0.0j
    leg = _legendre_normalized(q.two_I, np.cos(np.asarray(theta, dtype=float)))
    for (k, qq), c in coeffs.items():
        if qq >= 0:
            y = leg[k, qq] * np.exp(1j * qq * phi)
        else:
            y = (-1.0) ** (-qq) * leg[k, -qq] * np.exp(1j * qq * phi)
        total += y * c
    total *= np.sqrt(2.0 / np.pi)
    if abs(np.imag(total)) > imag_tol:
        raise ValueError(f"Wigner value has imaginary residue {np.imag(total):.2e}")
    return float(np.real(total))


@dataclass(frozen=True)
class WignerGrid:
    """Sampled W on a (theta, phi) grid with optional projection coordinates."""

    thetas: np.ndarray
    phis: np.ndarray
    values: np.ndarray
    projection: str = "none"
    proj_x: np.ndarray | None = None
    proj_y: np.ndarray | None = None

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("Wigner grid contains non-finite values")
        if np.any(np.diff(self.thetas) <= 0) or np.any(np.diff(self.phis) <= 0):
            raise ValueError("grid axes must be sorted ascending")


def _hammer_xy(theta: np.ndarray, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Equal-area Hammer projection; longitude 0 at phi = pi (map center)."""
    lat = np.pi / 2.0 - theta[:, None]
    lon = np.mod(phi[None, :] - np.pi, 2 * np.pi) - np.pi
    denom = np.sqrt(1.0 + np.cos(lat) * np.cos(lon / 2.0))
    x = 2.0 * np.sqrt(2.0) * np.cos(lat) * np.sin(lon / 2.0) / denom
    y = np.sqrt(2.0) * np.sin(lat) / denom
    return np.broadcast_to(x, (theta.size, phi.size)).copy(), np.broadcast_to(
        y, (theta.size, phi.size)
    ).copy()


def _polar_xy(theta: np.ndarray, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Azimuthal view from the south pole; the north pole is the outer circle."""
    r = (np.pi - theta[:, None]) / np.pi
    x = r * np.cos(phi[None, :])
    y = -r * np.sin(phi[None, :])
    return (
        np.broadcast_to(x, (theta.size, phi.size)).copy(),
        np.broadcast_to(y, (theta.size, phi.size)).copy(),
    )


def wigner_grid(
    rho,
    q: SpinQuantum,
    n_theta: int = 181,
    n_phi: int = 361,
    projection: str = "none",
) -> WignerGrid:
    """Evaluate W on a uniform angular grid, vectorized over the sphere."""
    if n_theta < 2 or n_phi < 2:
        raise ValueError("grid must have at least 2 points per axis")
    thetas = np.linspace(0.0, np.pi, n_theta)
    phis = np.linspace(0.0, 2.0 * np.pi, n_phi)
    values = _wigner_on_mesh(rho, q, thetas, phis)
    if projection == "hammer":
        px, py = _hammer_xy(thetas, phis)
    elif projection == "polar":
        px, py = _polar_xy(thetas, phis)
    elif projection == "none":
        px = py = None
    else:
        raise ValueError(f"unknown projection {projection!r}")
    return WignerGrid(
        thetas=thetas, phis=phis, values=values, projection=projection, proj_x=px, proj_y=py
    )


def _wigner_on_mesh(rho, q: SpinQuantum, thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    coeffs = tensor_decompose(rho, q)
    leg = _legendre_normalized(q.two_I, np.cos(thetas))  # (L+1, L+1, n_theta)
    total = np.zeros((thetas.size, phis.size), dtype=complex)
    for (k, qq), c in coeffs.items():
        if qq >= 0:
            rad = leg[k, qq]
            az = np.exp(1j * qq * phis)
        else:
            rad = (-1.0) ** (-qq) * leg[k, -qq]
            az = np.exp(1j * qq * phis)
        total += c * rad[:, None] * az[None, :]
    total *= np.sqrt(2.0 / np.pi)
    worst_imag = np.abs(total.imag).max()
    if worst_imag > 1e-9:
        raise ValueError(f"Wigner grid has imaginary residue {worst_imag:.2e}")
    return total.real


def wigner_sphere_integral(rho, q: SpinQuantum, n_leg: int = 64, n_phi: int = 128) -> float:
    """Quadrature of W over the sphere: Gauss-Legendre in cos(theta), uniform
    in phi.  Equals sqrt(8/d) Tr(rho) analytically."""
    nodes, weights = np.polynomial.legendre.leggauss(n_leg)
    thetas = np.arccos(nodes)
    order = np.argsort(thetas)
    thetas = thetas[order]
    w_sorted = weights[order]
    phis = np.linspace(0.0, 2.0 * np.pi, n_phi, endpoint=False)
    vals = _wigner_on_mesh(rho, q, thetas, phis)
    phi_int = vals.sum(axis=1) * (2.0 * np.pi / n_phi)
    return float((w_sorted * phi_int).sum())


def bloch_rotation_matrix(theta: float, phi: float) -> np.ndarray:
    """SO(3) action of the covariant rotation R_theta(phi) on Bloch vectors:
    right-handed rotation by -theta about the equatorial axis
    (cos phi, sin phi, 0)."""
    u = np.array([np.cos(phi), np.sin(phi), 0.0])
    c, s = np.cos(-theta), np.sin(-theta)
    ux, uy, uz = u
    k = np.array([[0.0, -uz, uy], [uz, 0.0, -ux], [-uy, ux, 0.0]])
    return c * np.eye(3) + s * k + (1.0 - c) * np.outer(u, u)


def direction(theta: float, phi: float) -> np.ndarray:
    return np.array(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
    )


def angles_of(n: np.ndarray) -> tuple[float, float]:
    n = np.asarray(n, dtype=float)
    n = n / np.linalg.norm(n)
    return float(np.arccos(np.clip(n[2], -1.0, 1.0))), float(np.arctan2(n[1], n[0]))


def grid_to_csv(grid: WignerGrid) -> str:
    """CSV export: theta_rad, phi_rad, x, y, value (x, y blank when unprojected)."""
    lines = ["theta_rad,phi_rad,x,y,value"]
    has_proj = grid.proj_x is not None
    for i, th in enumerate(grid.thetas):
        for j, ph in enumerate(grid.phis):
            if has_proj:
                lines.append(
                    f"{th!r},{ph!r},{grid.proj_x[i, j]!r},{grid.proj_y[i, j]!r},{grid.values[i, j]!r}"
                )
            else:
                lines.append(f"{th!r},{ph!r},,,{grid.values[i, j]!r}")
    return "\n".join(lines) + "\n"


def grid_to_json(grid: WignerGrid) -> str:
    import json

    doc = {
        "projection": grid.projection,
        "theta_rad": list(grid.thetas),
        "phi_rad": list(grid.phis),
        "values": [list(row) for row in grid.values],
    }
    return json.dumps(doc, indent=2)
