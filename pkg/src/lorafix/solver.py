"""Forward arrival-time model and the two TDoA position solvers.

A target at position p emits at the unknown time t0; gateway j at (a_j, b_j)
timestamps the arrival at

    t_j = t0 + d_j / c,        d_j = ||p - gw_j||.

Three gateways give three equations in the three unknowns (x, y, t0). Two
independent solution routes are implemented and cross-validated:

``solve_analytic``
    Squares each arrival equation and writes the system as a single linear
    solve plus a scalar quadratic. With the augmented vectors
    w_j = (a_j, b_j, i*c*t_j) and p = (x, y, i*c*t0), each equation becomes
    2 w_j . p = m_j + l where m_j = w_j . w_j and l = p . p. Gaussian
    elimination yields p = (l*u + v)/2 with u = W^-1 1 and v = W^-1 m, and
    substituting back into l = p . p gives

        (u.u) l^2 + (2 u.v - 4) l + (v.v) = 0.

    The imaginary third coordinate only ever appears squared, so the whole
    computation runs in real arithmetic with the indefinite inner product
    x1*y1 + x2*y2 - x3*y3.

``solve_closed_form``
    Subtracts the first squared equation from the other two, eliminating the
    quadratic terms and leaving a 2x2 linear system that expresses (x, y) as
    an affine function of the first-gateway range d1; the circle constraint
    (x-a1)^2 + (y-b1)^2 = d1^2 then closes a scalar quadratic in d1. This is
    the classic two-hyperbola intersection, fully elementwise, so it also
    ships as a vectorized batch variant for Monte Carlo work.

Both routes produce (up to) two algebraic candidates; the physical one is
chosen by the smallest range residual, with a tie broken in favor of the
candidate inside the gateway triangle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import SPEED_OF_LIGHT
from .geometry import GatewayTriple, Position, contains, distance

# Emission times earlier than this are rejected as ghost roots (unless that
# would reject every candidate). Slightly negative values must survive: the
# solver does not know the counter period, so the physical floor t0 > -T is
# the caller's to tighten.
DEFAULT_T0_FLOOR_S = -1e-6

# |t0| below this is numerical noise around zero and is snapped to exactly 0.
_T0_CLAMP_S = 1e-12

# A negative discriminant within this relative tolerance of the coefficient
# scale is treated as an exact double root (grazing hyperbolas).
_NEG_DISC_RTOL = 1e-9

# Residuals closer than the tie tolerance trigger the inside-the-triangle
# rule. Both algebraic roots solve the squared system exactly whenever the
# hyperbolas truly intersect twice, so their residuals are pure rounding
# noise.  That noise comes from cancellation among terms of size (c*t)^2 and
# so grows quadratically with the time scale of the observation (measured:
# ~7e-9 m at c*t ~ 3e4 m, ~4e-7 m at 3e5 m, ~5e-5 m at 3e6 m), while any
# informative residual gap — a root that fails the sign conditions — is
# meters to kilometers.  A quadratic scale term keeps the tie window two
# orders of magnitude above the noise floor and several below real gaps.
_RES_TIE_M = 1e-9
_RES_TIE_QUAD_PER_M = 1e-15


def _res_tie_tol(t_max_s: float) -> float:
    return _RES_TIE_M + _RES_TIE_QUAD_PER_M * (SPEED_OF_LIGHT * t_max_s) ** 2

# |det| below this relative threshold marks an unsolvable geometry.
_DET_RTOL = 1e-9


class SingularGeometryError(ValueError):
    """The gateway/timestamp configuration admits no unique solution."""


class NoRealRootError(ValueError):
    """The observation is inconsistent: the solution hyperbolas do not meet."""


@dataclass(frozen=True)
class ToAObservation:
    """Three gateway timestamps, seconds since the last sync reset.

    Values produced by the physical measurement chain are non-negative and
    below the counter overflow time; perturbed or synthetic observations may
    step outside that range, so only finiteness is enforced here.
    """

    t1: float
    t2: float
    t3: float

    def __post_init__(self):
        for t in (self.t1, self.t2, self.t3):
            if not math.isfinite(t):
                raise ValueError(f"timestamps must be finite, got {t!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.t1, self.t2, self.t3], dtype=float)


@dataclass(frozen=True)
class LocalizationEstimate:
    """A solved fix: position, emission time, and the selection diagnostics.

    ``root_index`` records which algebraic root of the closing quadratic was
    kept (0 or 1), and ``residual_m`` its root-mean-square range consistency.
    """

    pos: Position
    t0_s: float
    residual_m: float
    root_index: int

    def __post_init__(self):
        if not (self.residual_m >= 0):
            raise ValueError(f"residual must be >= 0, got {self.residual_m!r}")


def forward_toa(target: Position, gws: GatewayTriple, t0_s: float = 0.0) -> ToAObservation:
    """Noise-free arrival times t_j = t0 + d_j / c for a target emission."""
    if not (t0_s >= 0):
        raise ValueError(f"emission time must be non-negative, got {t0_s!r}")
    return ToAObservation(
        t0_s + distance(target, gws.g1) / SPEED_OF_LIGHT,
        t0_s + distance(target, gws.g2) / SPEED_OF_LIGHT,
        t0_s + distance(target, gws.g3) / SPEED_OF_LIGHT,
    )


def forward_toa_batch(points: np.ndarray, gws: GatewayTriple, t0_s=0.0) -> np.ndarray:
    """Vectorized forward model: (n, 2) positions -> (n, 3) arrival times.

    ``t0_s`` may be a scalar or an (n,) array of per-point emission times.
    """
    pts = np.asarray(points, dtype=float)
    t0 = np.asarray(t0_s, dtype=float)
    if np.any(t0 < 0):
        raise ValueError("emission times must be non-negative")
    g = gws.as_array()
    d = np.hypot(pts[:, None, 0] - g[None, :, 0], pts[:, None, 1] - g[None, :, 1])
    return (t0[:, None] if t0.ndim == 1 else t0) + d / SPEED_OF_LIGHT


def localization_error(true_pos: Position, est: LocalizationEstimate) -> float:
    """Euclidean distance between the true and the estimated position."""
    return distance(true_pos, est.pos)


def _range_residual(x: float, y: float, t0: float, t: np.ndarray, g: np.ndarray) -> float:
    """RMS mismatch between geometric ranges and time-implied ranges, meters."""
    s = 0.0
    for j in range(3):
        dj = math.hypot(x - g[j, 0], y - g[j, 1])
        r = dj - SPEED_OF_LIGHT * (t[j] - t0)
        s += r * r
    return math.sqrt(s / 3.0)


def residual(est: LocalizationEstimate, obs: ToAObservation, gws: GatewayTriple) -> float:
    """RMS range residual of an estimate against an observation, meters."""
    return _range_residual(est.pos.x, est.pos.y, est.t0_s, obs.as_array(), gws.as_array())


def _quadratic_roots(a: float, b: float, c: float) -> tuple[float, float]:
    """Both roots of a*x^2 + b*x + c = 0 via the cancellation-safe form.

    Returns (q/a, c/q) with q = -(b + sign(b)*sqrt(disc))/2; a vanishing
    leading coefficient sends the first root to infinity while the second
    smoothly becomes the linear solution -c/b, so callers simply drop
    non-finite roots. Raises NoRealRootError for a discriminant negative
    beyond the grazing tolerance.
    """
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        if -disc > _NEG_DISC_RTOL * max(b * b, abs(4.0 * a * c)):
            raise NoRealRootError(f"negative discriminant {float(disc)!r}")
        disc = 0.0
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    r1 = q / a if a != 0.0 else math.inf
    r2 = c / q if q != 0.0 else math.inf
    return (r1, r2)


def _select_candidate(cands, t, g, triple, t0_floor_s):
    """Pick the physical fix among algebraic candidates.

    ``cands`` holds (x, y, t0, root_index) tuples. Non-finite candidates are
    dropped; near-zero t0 is snapped to 0; candidates earlier than the t0
    floor are rejected unless that empties the pool; the smallest residual
    wins, with near-ties resolved toward the inside of the triangle.
    """
    finite = []
    for x, y, t0, idx in cands:
        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(t0)):
            continue
        if abs(t0) < _T0_CLAMP_S:
            t0 = 0.0
        finite.append((x, y, t0, idx))
    if not finite:
        raise NoRealRootError("no finite solution candidate")
    scored = [
        (_range_residual(x, y, t0, t, g), x, y, t0, idx) for x, y, t0, idx in finite
    ]
    passing = [s for s in scored if s[3] >= t0_floor_s] or scored
    passing.sort(key=lambda s: (s[0], s[4]))
    tie_tol = _res_tie_tol(float(np.max(np.abs(t))))
    best = passing[0]
    cx = (g[0, 0] + g[1, 0] + g[2, 0]) / 3.0
    cy = (g[0, 1] + g[1, 1] + g[2, 1]) / 3.0
    for cand in passing[1:]:
        if cand[0] - best[0] >= tie_tol:
            break
        # Tied candidates both solve the system exactly; fall back on the
        # deployment prior: inside the triangle first, then nearer its
        # centroid (covers near-edge fixes noise pushed just outside).
        def _key(s):
            inside = contains(triple, Position(s[1], s[2]))
            return (0 if inside else 1, math.hypot(s[1] - cx, s[2] - cy))

        if _key(cand) < _key(best):
            best = cand
    res, x, y, t0, idx = best
    return LocalizationEstimate(Position(x, y), t0, res, idx)


def solve_analytic(
    obs: ToAObservation, gws: GatewayTriple, t0_floor_s: float = DEFAULT_T0_FLOOR_S
) -> LocalizationEstimate:
    """Solve the three-gateway system by elimination on the augmented matrix.

    Builds the 3x3 matrix A with rows (a_j, b_j, c*t_j), solves A u = 1 and
    A v = m (m_j = a_j^2 + b_j^2 - c^2 t_j^2) by Gaussian elimination, and
    closes with the scalar quadratic in l = x^2 + y^2 - c^2 t0^2 using the
    indefinite inner product (see module docstring). Candidates are

        x = (l*u1 + v1) / 2,  y = (l*u2 + v2) / 2,  t0 = -(l*u3 + v3) / (2c).

    Raises
    ------
    SingularGeometryError
        If |det A| falls below a scale-relative threshold — collinear
        gateways, or a timestamp pattern that makes the third column
        dependent on the first two.
    NoRealRootError
        If the closing quadratic has no real root beyond tolerance.
    """
    c = SPEED_OF_LIGHT
    g = gws.as_array()
    t = obs.as_array()
    A = np.column_stack([g[:, 0], g[:, 1], c * t])
    scale = float(np.max(np.abs(A)))
    det = float(np.linalg.det(A))
    if scale == 0.0 or abs(det) < _DET_RTOL * scale**3:
        raise SingularGeometryError(f"arrival matrix is singular (det {det!r})")
    m = g[:, 0] ** 2 + g[:, 1] ** 2 - (c * t) ** 2
    uv_cols = np.linalg.solve(A, np.column_stack([np.ones(3), m]))
    u = uv_cols[:, 0]
    v = uv_cols[:, 1]
    # Indefinite inner products: the third coordinate carries the imaginary
    # unit, so its square enters with a minus sign.
    uu = u[0] * u[0] + u[1] * u[1] - u[2] * u[2]
    uvp = u[0] * v[0] + u[1] * v[1] - u[2] * v[2]
    vv = v[0] * v[0] + v[1] * v[1] - v[2] * v[2]
    roots = _quadratic_roots(uu, 2.0 * uvp - 4.0, vv)
    cands = []
    for idx, l in enumerate(roots):
        x = 0.5 * (l * u[0] + v[0])
        y = 0.5 * (l * u[1] + v[1])
        t0 = -(l * u[2] + v[2]) / (2.0 * c)
        cands.append((x, y, t0, idx))
    return _select_candidate(cands, t, g, gws, t0_floor_s)


@dataclass(frozen=True)
class BatchSolveResult:
    """Vectorized solve output; rows with ``ok`` False carry NaN values."""

    x: np.ndarray
    y: np.ndarray
    t0_s: np.ndarray
    residual_m: np.ndarray
    root_index: np.ndarray
    ok: np.ndarray


def solve_closed_form_batch(
    toas: np.ndarray, gws: GatewayTriple, t0_floor_s: float = DEFAULT_T0_FLOOR_S
) -> BatchSolveResult:
    """Closed-form TDoA solve of many observations at once.

    Subtracting the first gateway's squared range equation from the other
    two gives, with D_j1 = c*(t_j - t1),

        2(a_j - a1) x + 2(b_j - b1) y = K_j - D_j1^2 - 2 D_j1 d1,

    a linear 2x2 system whose solution is affine in the unknown range d1:
    x = xc + xl*d1, y = yc + yl*d1. The circle constraint around gateway 1
    then yields

        (xl^2 + yl^2 - 1) d1^2 + 2[(xc-a1) xl + (yc-b1) yl] d1
            + (xc-a1)^2 + (yc-b1)^2 = 0,

    solved with the same stable quadratic used by the analytic route. Root
    selection (t0 floor, residual, tie toward the triangle interior) matches
    the scalar solvers row for row.

    Parameters
    ----------
    toas : ndarray, shape (n, 3)
        Arrival-time rows.
    gws : GatewayTriple
        Gateway geometry shared by every row.
    t0_floor_s : float
        Ghost-root rejection floor on the emission time.

    Returns
    -------
    BatchSolveResult
        Per-row solution arrays; ``ok`` is False where no real root exists.
    """
    c = SPEED_OF_LIGHT
    t = np.asarray(toas, dtype=float)
    if t.ndim != 2 or t.shape[1] != 3:
        raise ValueError(f"toas must have shape (n, 3), got {t.shape}")
    g = gws.as_array()
    a1, b1 = g[0]
    a2, b2 = g[1]
    a3, b3 = g[2]

    A21, B21 = 2.0 * (a2 - a1), 2.0 * (b2 - b1)
    A31, B31 = 2.0 * (a3 - a1), 2.0 * (b3 - b1)
    D = A21 * B31 - A31 * B21
    gscale = max(abs(A21), abs(B21), abs(A31), abs(B31), 1e-300)
    if abs(D) < _DET_RTOL * gscale**2:
        raise SingularGeometryError("gateway difference matrix is singular")

    d21 = c * (t[:, 1] - t[:, 0])
    d31 = c * (t[:, 2] - t[:, 0])
    k2 = (a2 * a2 + b2 * b2) - (a1 * a1 + b1 * b1)
    k3 = (a3 * a3 + b3 * b3) - (a1 * a1 + b1 * b1)
    p2 = k2 - d21 * d21
    p3 = k3 - d31 * d31

    # (x, y) = (xc, yc) + (xl, yl) * d1 by Cramer's rule.
    xc = (p2 * B31 - p3 * B21) / D
    xl = (-2.0 * d21 * B31 + 2.0 * d31 * B21) / D
    yc = (A21 * p3 - A31 * p2) / D
    yl = (-2.0 * d31 * A21 + 2.0 * d21 * A31) / D

    fx = xc - a1
    fy = yc - b1
    qa = xl * xl + yl * yl - 1.0
    qb = 2.0 * (fx * xl + fy * yl)
    qc = fx * fx + fy * fy

    disc = qb * qb - 4.0 * qa * qc
    graze_tol = _NEG_DISC_RTOL * np.maximum(qb * qb, np.abs(4.0 * qa * qc))
    no_root = disc < -graze_tol
    disc = np.where(disc < 0.0, 0.0, disc)
    sq = np.sqrt(disc)
    q = -0.5 * (qb + np.copysign(sq, qb))
    with np.errstate(divide="ignore", invalid="ignore"):
        d1 = np.stack([q / qa, qc / q], axis=1)

    x = xc[:, None] + xl[:, None] * d1
    y = yc[:, None] + yl[:, None] * d1
    t0 = t[:, 0][:, None] - d1 / c
    t0 = np.where(np.abs(t0) < _T0_CLAMP_S, 0.0, t0)

    # Per-candidate RMS range residual.
    with np.errstate(invalid="ignore"):
        ssq = np.zeros_like(d1)
        for j in range(3):
            dj = np.hypot(x - g[j, 0], y - g[j, 1])
            r = dj - c * (t[:, j][:, None] - t0)
            ssq += r * r
        res = np.sqrt(ssq / 3.0)
    bad_cand = ~(np.isfinite(x) & np.isfinite(y) & np.isfinite(t0) & np.isfinite(res))
    res = np.where(bad_cand, np.inf, res)

    # t0 floor, ignored when it would reject both candidates.
    passes = (t0 >= t0_floor_s) & ~bad_cand
    any_pass = passes.any(axis=1)
    eff = np.where(passes | ~any_pass[:, None], res, np.inf)

    pick = np.argmin(eff, axis=1)
    both_finite = np.isfinite(eff).all(axis=1)
    tie_tol = _RES_TIE_M + _RES_TIE_QUAD_PER_M * (c * np.max(np.abs(t), axis=1)) ** 2
    tie = both_finite & (np.abs(eff[:, 0] - eff[:, 1]) < tie_tol)
    if np.any(tie):
        # Same deployment prior as the scalar path: inside the triangle
        # first, then nearer the centroid.
        in0 = _inside_mask(x[:, 0], y[:, 0], g)
        in1 = _inside_mask(x[:, 1], y[:, 1], g)
        cx = g[:, 0].mean()
        cy = g[:, 1].mean()
        with np.errstate(invalid="ignore"):
            cd0 = np.hypot(x[:, 0] - cx, y[:, 0] - cy)
            cd1 = np.hypot(x[:, 1] - cx, y[:, 1] - cy)
        better1 = (in1 & ~in0) | ((in1 == in0) & (cd1 < cd0))
        better0 = (in0 & ~in1) | ((in0 == in1) & (cd0 < cd1))
        pick = np.where(tie & better1, 1, pick)
        pick = np.where(tie & better0, 0, pick)

    rows = np.arange(t.shape[0])
    sel_res = eff[rows, pick]
    ok = np.isfinite(sel_res) & ~no_root
    nan = np.where(ok, 0.0, np.nan)
    return BatchSolveResult(
        x=x[rows, pick] + nan,
        y=y[rows, pick] + nan,
        t0_s=t0[rows, pick] + nan,
        residual_m=sel_res + nan,
        root_index=pick.astype(np.int8),
        ok=ok,
    )


def _inside_mask(x: np.ndarray, y: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Vectorized point-in-triangle test (boundary counts as inside)."""
    area2 = (g[1, 0] - g[0, 0]) * (g[2, 1] - g[0, 1]) - (g[2, 0] - g[0, 0]) * (
        g[1, 1] - g[0, 1]
    )
    w1 = ((g[1, 0] - x) * (g[2, 1] - y) - (g[2, 0] - x) * (g[1, 1] - y)) / area2
    w2 = ((x - g[0, 0]) * (g[2, 1] - g[0, 1]) - (g[2, 0] - g[0, 0]) * (y - g[0, 1])) / area2
    w3 = 1.0 - w1 - w2
    with np.errstate(invalid="ignore"):
        return (w1 >= 0.0) & (w2 >= 0.0) & (w3 >= 0.0)


def solve_closed_form(
    obs: ToAObservation, gws: GatewayTriple, t0_floor_s: float = DEFAULT_T0_FLOOR_S
) -> LocalizationEstimate:
    """Closed-form TDoA solve of a single observation.

    Thin wrapper over :func:`solve_closed_form_batch` (one row), so the
    scalar and batch paths cannot drift apart.

    Raises
    ------
    SingularGeometryError
        If the pairwise gateway-difference system is degenerate.
    NoRealRootError
        If the range quadratic has no real root: the measured hyperbolas
        fail to intersect.
    """
    out = solve_closed_form_batch(
        obs.as_array()[None, :], gws, t0_floor_s=t0_floor_s
    )
    if not bool(out.ok[0]):
        raise NoRealRootError("observation admits no real range solution")
    return LocalizationEstimate(
        Position(float(out.x[0]), float(out.y[0])),
        float(out.t0_s[0]),
        float(out.residual_m[0]),
        int(out.root_index[0]),
    )
