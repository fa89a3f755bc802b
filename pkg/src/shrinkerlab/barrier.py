"""Exterior-sphere barriers, gradient estimates, and separation heuristics.

The barrier profile solves  psi'' + psi' (m/(d+R) - d + |z|) = 0  on a shell
of width a outside a tangent ball of radius R, normalized to run from 0 to 1:

    psi(d) = int_0^d e^(t^2/2) (t+R)^-m e^(-|z|t) dt  /  (same over [0, a]).

Composed with the distance to the ball it is a weighted-superharmonic upper
barrier, which yields the boundary gradient bound
(R+1)^m / R^m * e^|z| / dist implemented by `estimate_gradient`.

The Lipschitz separation barriers (clamped distance quotients) provide finite
energy competitors pinned to 0 and 1 on the two boundary pieces, and
`separation_check` evaluates the finite-sample analogue of the asymptotic
separation hypothesis dist(z, Sigma_1) >= const * e^(-b|z|^2) / P(|z|).
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .domain import PlaneBoundary, SphereBoundary
from .errors import ContractViolation, ParameterError
from .fields import ScalarField, weighted_laplacian
from .quadrature import adaptive_simpson, halton, sphere_directions

__all__ = [
    "BarrierParams",
    "BarrierResult",
    "build_psi",
    "supersolution_check",
    "estimate_gradient",
    "lipschitz_barrier",
    "measured_lipschitz",
    "SeparationHypothesis",
    "SeparationSurface",
    "separation_check",
    "PlaneSurface",
    "CylinderSurface",
    "GraphSurface",
]


@dataclass(frozen=True)
class BarrierParams:
    """Shell data: exterior sphere radius R, shell width a, hypersurface
    dimension m, and the norm |z| of the tangency point."""

    R: float
    a: float
    m: int
    z_norm: float = 0.0

    def __post_init__(self):
        if self.R <= 0 or self.a <= 0:
            raise ParameterError("barrier radius and shell width must be positive")
        if not (isinstance(self.m, int) and self.m >= 1):
            raise ParameterError("hypersurface dimension m must be an integer >= 1")
        if self.z_norm < 0:
            raise ParameterError("|z| must be nonnegative")


@dataclass
class BarrierResult:
    psi: callable          # psi(d) on [0, a] (extends smoothly beyond)
    psi_prime_0: float
    rough_bound: float     # (R+a)^m / (R^m a) * e^(a |z|)
    gradient_estimate: float
    params: BarrierParams


def _barrier_integrand(params):
    R, m, z = params.R, params.m, params.z_norm

    def g(t):
        return math.exp(0.5 * t * t - z * t) / (t + R) ** m

    return g


def build_psi(params, quad_tol=1e-10):
    """Construct the normalized barrier profile and its slope data."""
    g = _barrier_integrand(params)
    denom = adaptive_simpson(g, 0.0, params.a, tol=quad_tol)

    def psi(d):
        return adaptive_simpson(g, 0.0, float(d), tol=quad_tol) / denom

    psi_prime_0 = 1.0 / (params.R ** params.m * denom)
    rough = ((params.R + params.a) ** params.m / (params.R ** params.m * params.a)
             * math.exp(params.a * params.z_norm))
    if psi_prime_0 > rough * (1.0 + 1e-12):
        raise ContractViolation(
            f"psi'(0) = {psi_prime_0:.6g} exceeds its rough bound {rough:.6g}")
    grad_est = estimate_gradient(params.z_norm, params.R, params.a, params.m)
    return BarrierResult(psi=psi, psi_prime_0=psi_prime_0, rough_bound=rough,
                         gradient_estimate=grad_est, params=params)


def supersolution_check(params, samples, quad_tol=1e-10, fd_step=1e-5,
                        profile="ode"):
    """Maximum of Lap_f(psi o d) over quasi-random shell points.

    The shell sits outside the ball of radius R centered at (|z| + R) e_1,
    tangent to |z| e_1; the ODE profile must give a nonpositive maximum up to
    differencing noise.  profile="linear" replaces psi by d/a as a control
    that the check actually detects sign violations.
    """
    if samples <= 0:
        warnings.warn("empty shell sample: supersolution check is vacuous",
                      RuntimeWarning, stacklevel=2)
        return 0.0
    n = params.m + 1
    center = np.zeros(n)
    center[0] = params.z_norm + params.R

    if profile == "ode":
        result = build_psi(params, quad_tol=quad_tol)
        psi = result.psi
    elif profile == "linear":
        def psi(d):
            return d / params.a
    else:
        raise ParameterError(f"unknown barrier profile {profile!r}")

    u = halton(samples, 1)[:, 0]
    radii = params.R + (0.05 + 0.9 * u) * params.a
    dirs = sphere_directions(samples, n)
    points = center[None, :] + radii[:, None] * dirs

    fld = ScalarField(lambda x: psi(float(np.linalg.norm(x - center)) - params.R))
    worst = -math.inf
    for p in points:
        worst = max(worst, weighted_laplacian(fld, p, h=fd_step))
    return worst


def estimate_gradient(z, R, dist_to_sigma1, m):
    """Boundary gradient bound (R+1)^m / R^m * e^|z| / dist at a tangency z.

    The shell width is a = min(1, dist): the bound is continuous in a, so the
    epsilon in a = min(1, dist - eps) is taken to zero.
    """
    if R <= 0 or dist_to_sigma1 <= 0:
        raise ParameterError("need R > 0 and a positive distance to sigma1")
    z_norm = float(z) if np.isscalar(z) else float(np.linalg.norm(np.asarray(z, dtype=float)))
    return (R + 1.0) ** m / R ** m * math.exp(z_norm) / dist_to_sigma1


# --------------------------------------------------------------------------
# Lipschitz separation barriers


def _clamp01(t):
    return np.clip(t, 0.0, 1.0)


def _batch_unsigned(piece, pts):
    return np.abs(np.asarray(piece.raw_signed(pts), dtype=float))


def _batch_project(piece, pts):
    pts = np.asarray(pts, dtype=float)
    if isinstance(piece, SphereBoundary):
        r = np.linalg.norm(pts, axis=1)
        return piece.radius * pts / np.maximum(r, 1e-300)[:, None]
    if isinstance(piece, PlaneBoundary):
        n = np.asarray(piece.normal)
        return pts - (pts @ n - piece.offset)[:, None] * n[None, :]
    return np.array([piece.project(p) for p in pts])


def boundary_separation(domain, per_dim=128):
    """inf dist(Sigma_1, Sigma_2); exact for the model pairs, sampled otherwise."""
    if domain.sigma2 is None:
        raise ParameterError("separation needs two boundary pieces")
    p1, p2 = domain.sigma1.piece, domain.sigma2.piece
    if isinstance(p1, PlaneBoundary) and isinstance(p2, PlaneBoundary) \
            and np.allclose(p1.normal, p2.normal):
        return abs(p2.offset - p1.offset)
    if isinstance(p1, SphereBoundary) and isinstance(p2, SphereBoundary):
        return abs(p2.radius - p1.radius)
    nodes, _ = domain.sigma1.quad_nodes(domain.ambient_dim, domain.exhaustion_radius,
                                        per_dim=per_dim)
    return float(np.min(_batch_unsigned(p2, nodes)))


def lipschitz_barrier(mode, domain):
    """Locally Lipschitz field pinned to 0 on Sigma_1 and 1 on Sigma_2.

    mode="positive-distance" uses the clamped symmetric distance quotient
    (d1 - d2 + D) / (2D) and requires a strictly positive separation D;
    mode="projection" uses d1(z) / dist(Pi_1(z), Sigma_2) with the nearest
    point projection onto Sigma_1.
    """
    if domain.sigma2 is None:
        raise ParameterError("the separation barriers need two boundary pieces")
    p1, p2 = domain.sigma1.piece, domain.sigma2.piece

    if mode == "positive-distance":
        D = boundary_separation(domain)
        if D <= 0:
            raise ParameterError(
                "measured boundary separation is not positive; the positive-distance "
                "barrier requires dist(Sigma_1, Sigma_2) > 0")

        def batch(pts):
            pts = np.atleast_2d(np.asarray(pts, dtype=float))
            d1 = _batch_unsigned(p1, pts)
            d2 = _batch_unsigned(p2, pts)
            return _clamp01((d1 - d2 + D) / (2.0 * D))
    elif mode == "projection":
        def batch(pts):
            pts = np.atleast_2d(np.asarray(pts, dtype=float))
            d1 = _batch_unsigned(p1, pts)
            denom = _batch_unsigned(p2, _batch_project(p1, pts))
            return _clamp01(d1 / np.maximum(denom, 1e-300))
    else:
        raise ParameterError(f"unknown barrier mode {mode!r}")

    return ScalarField(lambda x: float(batch(x[None, :])[0]), batch_evaluator=batch)


def measured_lipschitz(fld, domain, count=2000, delta=1e-4, radius=None):
    """Numerical Lipschitz estimate over quasi-random interior points."""
    if radius is None:
        radius = min(domain.exhaustion_radius, 6.0)
    pts = (halton(count, domain.ambient_dim) - 0.5) * 2.0 * radius
    inside = np.ones(count, dtype=bool)
    for _, ob in domain.pieces():
        inside &= np.asarray(ob.depth(pts)) > delta
    pts = pts[inside]
    worst = 0.0
    for ax in range(domain.ambient_dim):
        e = np.zeros(domain.ambient_dim)
        e[ax] = delta
        vals = np.abs(fld.batch(pts + e) - fld.batch(pts - e)) / (2.0 * delta)
        worst = max(worst, float(vals.max(initial=0.0)))
    return worst


# --------------------------------------------------------------------------
# asymptotic separation hypothesis


@dataclass
class SeparationHypothesis:
    """Decay data of the asymptotic separation condition.

    b is the Gaussian decay rate (must satisfy 0 <= b < 1/2, and < 1/4 in
    variational mode), poly_p the polynomial coefficients (numpy order), and
    (c, poly_q) the optional tube-width decay with the constraint
    m c + b < 1/2 checked against the ambient surface dimension.
    """

    b: float
    poly_p: tuple = (1.0,)
    c: float = None
    poly_q: tuple = None
    variational: bool = False

    def __post_init__(self):
        if not 0.0 <= self.b < 0.5:
            raise ParameterError("separation rate must satisfy 0 <= b < 1/2")
        if self.variational and not self.b < 0.25:
            raise ParameterError("variational route needs the stronger bound b < 1/4")
        if self.c is not None and self.c <= 0:
            raise ParameterError("tube decay rate c must be positive")

    def validate_with_dim(self, m):
        if self.c is not None and not (m * self.c + self.b < 0.5):
            raise ParameterError(
                f"tube/separation rates violate m*c + b < 1/2 (m={m}, c={self.c}, b={self.b})")


class SeparationSurface:
    """Sampling/distances interface for separation checks (not a solver piece)."""

    ambient_dim = None

    def distance_to_point(self, x):
        raise NotImplementedError

    def sample_at_norm(self, norm, count):
        """Points of the surface with |z| = norm, or None if unreachable."""
        raise NotImplementedError


class PlaneSurface(SeparationSurface):
    def __init__(self, normal, offset=0.0):
        self.piece = PlaneBoundary(tuple(normal), float(offset))
        self.ambient_dim = len(self.piece.normal)

    def distance_to_point(self, x):
        return float(np.abs(self.piece.raw_signed(np.asarray(x, dtype=float))))

    def distance_batch(self, pts):
        return _batch_unsigned(self.piece, pts)

    def sample_at_norm(self, norm, count):
        off = self.piece.offset
        if norm < abs(off):
            return None
        reach = math.sqrt(max(norm * norm - off * off, 0.0))
        n = np.asarray(self.piece.normal)
        from .geometry import complement_frame
        tangents = complement_frame(n)
        dirs = sphere_directions(count, self.ambient_dim - 1)
        return off * n[None, :] + reach * dirs @ tangents


class CylinderSurface(SeparationSurface):
    """S^k of radius sqrt(k) times R^(m-k), spherical factor in coords 0..k."""

    def __init__(self, k, m):
        from .geometry import Cylinder
        self.model = Cylinder(k=k, m=m)
        self.ambient_dim = m + 1

    def distance_to_point(self, x):
        return abs(self.model.signed_distance(x))

    def sample_at_norm(self, norm, count):
        k = self.model.k
        if norm < self.model.radius:
            return None
        axial_reach = math.sqrt(max(norm * norm - k, 0.0))
        dirs = sphere_directions(count, k + 1)
        flat = sphere_directions(count, max(self.model.m - k, 1))[:, : self.model.m - k]
        pts = np.zeros((count, self.ambient_dim))
        pts[:, : k + 1] = self.model.radius * dirs
        pts[:, k + 1:] = axial_reach * flat
        return pts


class GraphSurface(SeparationSurface):
    """Graph {x_n = height(|x_hat|)} over the horizontal hyperplane."""

    def __init__(self, height, ambient_dim=3):
        self.height = height
        self.ambient_dim = ambient_dim

    def distance_to_point(self, x):
        raise ParameterError("graph surface is used only as a sampled sigma2")

    def sample_at_norm(self, norm, count):
        lo, hi = 0.0, norm
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid * mid + self.height(mid) ** 2 <= norm * norm:
                lo = mid
            else:
                hi = mid
        rho = 0.5 * (lo + hi)
        dirs = sphere_directions(count, self.ambient_dim - 1)
        pts = np.zeros((count, self.ambient_dim))
        pts[:, :-1] = rho * dirs
        pts[:, -1] = self.height(rho)
        return pts


@dataclass
class SeparationReport:
    ratios: list          # (|z|, worst ratio at that norm)
    passes: bool
    truncated: bool

    def to_csv(self):
        lines = ["z_norm,ratio"]
        lines += [f"{z!r},{r!r}" for z, r in self.ratios]
        return "\n".join(lines) + "\n"


def separation_check(hyp, sigma1, sigma2, sample_norms, directions=8, margin=1e-6):
    """Finite-sample check of the separation hypothesis along sigma2.

    For quasi-random points z on sigma2 at each requested norm, evaluates
    dist(z, sigma1) * e^(b |z|^2) * P(|z|) and requires the worst ratio over
    the top half of the norms to clear the margin.  This is an explicitly
    finite-sample heuristic, not a liminf.
    """
    sample_norms = [float(s) for s in sample_norms]
    if any(b <= a for a, b in zip(sample_norms, sample_norms[1:])):
        raise ParameterError("sample norms must be strictly increasing")
    hyp.validate_with_dim(sigma2.ambient_dim - 1)

    ratios = []
    truncated = False
    for s in sample_norms:
        pts = sigma2.sample_at_norm(s, directions)
        if pts is None:
            truncated = True
            continue
        dists = (sigma1.distance_batch(pts) if hasattr(sigma1, "distance_batch")
                 else np.array([sigma1.distance_to_point(p) for p in pts]))
        norms = np.linalg.norm(pts, axis=1)
        scale = np.exp(hyp.b * norms ** 2) * np.polyval(list(hyp.poly_p), norms)
        ratios.append((s, float(np.min(dists * scale))))

    if not ratios:
        raise ParameterError("no sample norms were reachable on sigma2")
    top = ratios[len(ratios) // 2:]
    passes = bool(min(r for _, r in top) > margin)
    return SeparationReport(ratios=ratios, passes=passes, truncated=truncated)
