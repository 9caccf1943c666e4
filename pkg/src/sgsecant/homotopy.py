"""Witness sets for parametrized hypersurfaces by monodromy and the trace test.

The hypersurface is presented only through its parametrization, so all path
tracking happens on the parameter base: the square system couples the
parametrization to a moving line through F(p) = λ·(a + t·b), and random
affine slices on the parameters absorb the positive-dimensional fibers.
Witness points are compared in the image, never on parameters.

Degrees come out of the classical loop: seed one point of H∩L, grow the set
by monodromy around random loops of lines, and stop once the trace of the
set moves linearly under a parallel translation of the line.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import tensor_core
from .tensor_core import SecantSpec


class NotHypersurfaceError(RuntimeError):
    """The measured cone dimension does not identify a hypersurface."""

    def __init__(self, message, cone_dim=None):
        super().__init__(message)
        self.cone_dim = cone_dim


class MonodromyError(RuntimeError):
    """A monodromy loop lost every path."""


@dataclass(frozen=True)
class TrackOptions:
    newton_tol: float = 1e-10
    max_newton: int = 40  # hard cap, used when sharpening endpoints
    step_newton: int = 4  # corrections per step; slower ones fail the step
    h_init: float = 0.1
    h_min: float = 1e-7
    h_max: float = 0.25
    growth_streak: int = 5
    divergence: float = 1e12
    dedup_tol: float = 1e-6
    trace_tol: float = 1e-6


class SecantParametrization:
    """Map from all generator entries (v^i, E^i) to ambient coordinates."""

    def __init__(self, spec: SecantSpec):
        self.spec = spec
        self.nparams = spec.param_count
        self.ncoords = spec.coord_count

    def _unpack(self, p):
        spec = self.spec
        per = spec.params_per_term
        out = []
        for i in range(spec.s):
            chunk = p[i * per : (i + 1) * per]
            v = chunk[: spec.m + 1]
            E = chunk[spec.m + 1 :].reshape(spec.k + 1, spec.n + 1)
            out.append(tensor_core.RankOneParams(v, E))
        return out

    def evaluate(self, p):
        return tensor_core.point_from_params(self.spec, self._unpack(p))

    def jacobian(self, p):
        return tensor_core.jacobian_at_params(self.spec, self._unpack(p))

    def sample(self, rng):
        point = tensor_core.sample_secant_point(self.spec, rng)
        return np.concatenate(
            [np.concatenate([q.v, q.E.ravel()]) for q in point.params]
        )


@dataclass
class WitnessPoint:
    params: np.ndarray
    t: complex
    lam: complex
    image: np.ndarray  # chart-normalized ambient point


@dataclass
class WitnessSet:
    a: np.ndarray
    b: np.ndarray
    chart: int
    points: list
    seed: int = None
    dedup_tol: float = 1e-6
    trace_residual: float = None

    def __len__(self):
        return len(self.points)

    def sorted_t(self):
        return sorted((p.t for p in self.points), key=lambda z: (z.real, z.imag))

    def to_json(self, spec: SecantSpec = None, degree: int = None) -> dict:
        return {
            "spec": spec.to_json() if spec is not None else None,
            "line": {
                "a": [[z.real, z.imag] for z in self.a],
                "b": [[z.real, z.imag] for z in self.b],
            },
            "points": [
                {
                    "image": [[z.real, z.imag] for z in p.image],
                    "t": [p.t.real, p.t.imag],
                    "lambda": [p.lam.real, p.lam.imag],
                }
                for p in self.points
            ],
            "seed": self.seed,
            "degree": degree if degree is not None else len(self.points),
            "trace_residual": self.trace_residual,
        }


@dataclass
class SlicedSystem:
    par: object
    slice_matrix: np.ndarray
    slice_rhs: np.ndarray
    a: np.ndarray
    b: np.ndarray
    chart: int
    spec: SecantSpec = None

    @property
    def nunknowns(self):
        return self.par.nparams + 2

    def split(self, z):
        return z[:-2], z[-2], z[-1]

    def residual(self, z, line=None):
        a, b = line if line is not None else (self.a, self.b)
        p, t, lam = self.split(z)
        top = self.par.evaluate(p) - lam * (a + t * b)
        bottom = self.slice_matrix @ p - self.slice_rhs
        return np.concatenate([top, bottom])

    def jacobian(self, z, line=None):
        a, b = line if line is not None else (self.a, self.b)
        n = self.par.ncoords
        m = self.slice_matrix.shape[0]
        J = np.zeros((n + m, self.nunknowns), dtype=complex)
        J[:n] = self.top_jacobian(z, line)
        J[n:, : self.par.nparams] = self.slice_matrix
        return J

    def top_residual(self, z, line=None):
        a, b = line if line is not None else (self.a, self.b)
        p, t, lam = self.split(z)
        return self.par.evaluate(p) - lam * (a + t * b)

    def top_jacobian(self, z, line=None):
        a, b = line if line is not None else (self.a, self.b)
        p, t, lam = self.split(z)
        J = np.empty((self.par.ncoords, self.nunknowns), dtype=complex)
        J[:, : self.par.nparams] = self.par.jacobian(p)
        J[:, -2] = -lam * b
        J[:, -1] = -(a + t * b)
        return J

    def min_norm_solve(self, z, line, rhs):
        """Minimal-norm solution of (top Jacobian) @ dz = rhs.

        Moving with minimal norm keeps the parameter lift orthogonal to the
        symmetry-group orbit that makes up the fibers, which is what keeps
        gauge representatives bounded along paths.
        """
        J = self.top_jacobian(z, line)
        JH = J.conj().T
        w = np.linalg.solve(J @ JH, rhs)
        return JH @ w

    def image_of(self, z):
        p, _, _ = self.split(z)
        x = self.par.evaluate(p)
        return x / x[self.chart]


def _gaussian(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def build_sliced_system(spec: SecantSpec, rng, force: bool = False):
    """Square system for H∩L with a seed solution on a line through F(p0).

    Refuses specs whose measured tangent rank is not one below the ambient
    coordinate count, since only hypersurfaces have line-witness sets.
    """
    return _build_from_parametrization(
        SecantParametrization(spec), rng, force=force, spec=spec
    )


def _build_from_parametrization(par, rng, force=False, spec=None, retries=5):
    n = par.ncoords
    n_slices = par.nparams + 2 - n
    if n_slices < 0:
        raise ValueError("parametrization has fewer parameters than coordinates")
    for _ in range(retries):
        p0 = par.sample(rng)
        jac = par.jacobian(p0)
        cone = tensor_core.numeric_rank(jac)
        if cone != n - 1:
            if cone < n - 1:
                continue  # degenerate draw; a fresh sample may fix it
        break
    if cone != n - 1 and not force:
        raise NotHypersurfaceError(
            f"measured cone dimension {cone}, ambient coordinate count {n}: "
            "not a hypersurface",
            cone_dim=cone,
        )
    x0 = par.evaluate(p0)
    chart = int(np.argmax(np.abs(x0)))
    lam0 = x0[chart]
    a = x0 / lam0
    b = _gaussian(rng, n)
    b[chart] = 0.0
    # the full unsliced Jacobian must drop rank by exactly the slice count
    full = np.hstack([jac, (-lam0 * b).reshape(-1, 1), (-a).reshape(-1, 1)])
    if tensor_core.numeric_rank(full) != n:
        raise RuntimeError(
            "fiber dimension does not match the slice count; "
            "refusing to track an inconsistent system"
        )
    S = _gaussian(rng, (n_slices, par.nparams))
    system = SlicedSystem(
        par=par,
        slice_matrix=S,
        slice_rhs=S @ p0,
        a=a,
        b=b,
        chart=chart,
        spec=spec,
    )
    z0 = np.concatenate([p0, [0.0, lam0]])
    res = np.linalg.norm(system.residual(z0))
    if not res < 1e-12 * max(1.0, np.linalg.norm(x0)):
        raise RuntimeError(f"seed residual {res} too large")
    return system, z0


@dataclass
class TrackResult:
    z: np.ndarray
    success: bool
    reason: str = "ok"
    steps: int = 0


def _newton(system, z, line, tol, max_iter):
    """Minimal-norm Newton correction onto H∩L at a fixed line.

    Returns (best iterate, converged); the best iterate is the one with the
    smallest residual seen, so a diverging tail cannot spoil a good point.
    """
    best = z
    best_norm = np.inf
    for _ in range(max_iter):
        r = system.top_residual(z, line)
        norm = np.linalg.norm(r, np.inf)
        if not np.isfinite(norm):
            return best, False
        if norm < best_norm:
            best, best_norm = z, norm
        if norm < tol:
            return z, True
        if norm > 4.0 * best_norm:
            return best, False  # diverging correction
        try:
            dz = system.min_norm_solve(z, line, r)
        except np.linalg.LinAlgError:
            return best, False
        z = z - dz
    r = system.top_residual(z, line)
    if np.linalg.norm(r, np.inf) < tol:
        return z, True
    return best, False


def track_path(system, z0, schedule, opts: TrackOptions = TrackOptions()) -> TrackResult:
    """Adaptive Euler-predictor Newton-corrector tracking over u in [0, 1].

    `schedule(u)` supplies the line (a, b) and its u-derivative.  Prediction
    and correction both move with minimal norm.  Step size halves on a
    failed correction and doubles after a streak of successes; falling below
    the minimum step flags the path as failed instead of raising.
    """
    line0 = schedule(0.0)[:2]
    r0 = np.linalg.norm(system.top_residual(z0, line0), np.inf)
    if not r0 < 1e3 * opts.newton_tol * max(1.0, abs(z0[-1])):
        raise ValueError(f"start solution residual {r0} above Newton tolerance")
    try:
        system.min_norm_solve(z0, line0, system.top_residual(z0, line0))
    except np.linalg.LinAlgError:
        raise ValueError("singular Jacobian at the start solution")
    z = z0.astype(complex)
    u = 0.0
    h = opts.h_init
    streak = 0
    steps = 0
    while u < 1.0:
        h = min(h, 1.0 - u)
        a, b, da, db = schedule(u)
        p, t, lam = system.split(z)
        dline = -lam * (da + t * db)
        try:
            tangent = system.min_norm_solve(z, (a, b), dline)
        except np.linalg.LinAlgError:
            return TrackResult(z, False, "singular Jacobian on path", steps)
        predicted = z - h * tangent
        target = u + h
        # the residual scale grows with the point; tolerate proportionally
        tol = opts.newton_tol * max(1.0, abs(lam))
        z_new, ok = _newton(
            system, predicted, schedule(target)[:2], tol,
            min(opts.step_newton, opts.max_newton),
        )
        steps += 1
        if ok:
            # trust region: a correction comparable to the predicted move
            # means the corrector may have slid onto another branch
            dist_corr = np.linalg.norm(z_new - predicted)
            dist_pred = np.linalg.norm(h * tangent)
            ok = dist_corr <= 0.5 * dist_pred + 1e-8 * (1.0 + np.linalg.norm(z))
        if ok and np.linalg.norm(z_new) < opts.divergence:
            z = z_new
            u = target
            streak += 1
            if streak >= opts.growth_streak:
                h = min(2 * h, opts.h_max)
                streak = 0
        else:
            streak = 0
            h = h / 2
            if h < opts.h_min:
                return TrackResult(z, False, "step size underflow", steps)
    # endpoint polish, best effort beyond the tracking tolerance
    z, _ = _newton(system, z, schedule(1.0)[:2], 1e-13, opts.max_newton)
    return TrackResult(z, True, "ok", steps)


def _linear_schedule(rep_from, rep_to):
    a0, b0 = rep_from
    a1, b1 = rep_to
    da = a1 - a0
    db = b1 - b0

    def schedule(u):
        return (a0 + u * da, b0 + u * db, da, db)

    return schedule


def _translate_schedule(a, b, c, tau):
    zero = np.zeros_like(b)

    def schedule(u):
        return (a + (u * tau) * c, b, tau * c, zero)

    return schedule


def _map_tracks(jobs, threads):
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda f: f(), jobs))
    return [job() for job in jobs]


def monodromy_loop(system, witness: WitnessSet, rng, opts: TrackOptions = TrackOptions(), threads: int = 1) -> WitnessSet:
    """Carry every witness point around a random loop of lines and merge.

    The loop passes through two fresh random lines, with a random
    unit-modulus multiplier on each leg so that repeated loops explore
    independent paths.  Path failures drop that point for this loop; losing
    every path is an error.
    """
    if not witness.points:
        raise ValueError("monodromy needs a nonempty witness set")
    n = system.par.ncoords
    base = (witness.a, witness.b)
    reps = [
        (_gaussian(rng, n), _gaussian(rng, n)),
        (_gaussian(rng, n), _gaussian(rng, n)),
        base,
    ]
    gammas = np.exp(2j * np.pi * rng.random(3))
    failures = 0
    jobs = []
    for point in witness.points:
        z = np.concatenate([point.params, [point.t, point.lam]])

        def job(z=z):
            current = z
            rep_from = base
            for leg, rep_to in enumerate(reps):
                scaled_from = (gammas[leg] * rep_from[0], gammas[leg] * rep_from[1])
                current = current.copy()
                current[-1] /= gammas[leg]
                result = track_path(
                    system, current, _linear_schedule(scaled_from, rep_to), opts
                )
                if not result.success:
                    return None
                current = result.z
                rep_from = rep_to
            return current

        jobs.append(job)
    merged = list(witness.points)
    for outcome in _map_tracks(jobs, threads):
        if outcome is None or _merge_endpoint(system, witness, merged, outcome, opts) is None:
            failures += 1
    if failures == len(witness.points):
        raise MonodromyError("every monodromy path failed")
    out = replace(witness, points=_sorted_points(merged))
    _check_witness_invariants(system, out, opts)
    return out


def _merge_endpoint(system, witness, points, z, opts):
    """Validate an endpoint as a witness point and merge it; None when the
    endpoint is not on the line (e.g. a path ran into the zero-image branch)."""
    p, t, lam = system.split(z)
    x = system.par.evaluate(p)
    if abs(x[witness.chart]) < 1e-8 * np.linalg.norm(x):
        return None
    image = x / x[witness.chart]
    line_pt = witness.a + t * witness.b
    if np.linalg.norm(image - line_pt / line_pt[witness.chart]) > 1e-8 * max(
        1.0, np.linalg.norm(line_pt)
    ):
        return None
    for existing in points:
        if np.linalg.norm(image - existing.image) < opts.dedup_tol * max(
            1.0, np.linalg.norm(existing.image)
        ):
            return False
    points.append(WitnessPoint(params=p, t=complex(t), lam=complex(lam), image=image))
    return True


def _sorted_points(points):
    return sorted(points, key=lambda q: (q.t.real, q.t.imag))


def _check_witness_invariants(system, witness: WitnessSet, opts):
    """Every point satisfies the parametrized system and sits on the line."""
    for q in witness.points:
        z = np.concatenate([q.params, [q.t, q.lam]])
        x = system.par.evaluate(q.params)
        res = np.linalg.norm(x - q.lam * (witness.a + q.t * witness.b))
        if not res < 1e-10 * max(1.0, np.linalg.norm(x)):
            raise RuntimeError(f"witness point residual {res} out of tolerance")
        on_line = witness.a + q.t * witness.b
        dist = np.linalg.norm(q.image - on_line / on_line[witness.chart])
        if not dist < 1e-8 * max(1.0, np.linalg.norm(on_line)):
            raise RuntimeError(f"witness image off the line by {dist}")


@dataclass
class TraceResult:
    status: str  # pass | fail | inconclusive
    residual: float = None


def trace_test(system, witness: WitnessSet, rng, opts: TrackOptions = TrackOptions(), threads: int = 1) -> TraceResult:
    """Linearity of the coordinate sum under a parallel translation of the line.

    Tracks the witness set to the translated lines at τ = ±1 and compares
    the three coordinate sums; any failed path makes the outcome
    inconclusive rather than a verdict.
    """
    if not witness.points:
        raise ValueError("trace test needs a nonempty witness set")
    c = 0.5 * _gaussian(rng, system.par.ncoords)
    c[witness.chart] = 0.0
    sums = {0: np.sum([q.image for q in witness.points], axis=0)}
    for tau in (1, -1):
        jobs = []
        for point in witness.points:
            z = np.concatenate([point.params, [point.t, point.lam]])

            def job(z=z):
                return track_path(
                    system, z, _translate_schedule(witness.a, witness.b, c, tau), opts
                )

            jobs.append(job)
        images = []
        for result in _map_tracks(jobs, threads):
            if not result.success:
                return TraceResult(status="inconclusive")
            images.append(system.image_of(result.z))
        # two paths colliding onto one endpoint corrupts the sum: retryable
        for i in range(len(images)):
            for j in range(i + 1, len(images)):
                if np.linalg.norm(images[i] - images[j]) < opts.dedup_tol * max(
                    1.0, np.linalg.norm(images[i])
                ):
                    return TraceResult(status="inconclusive")
        sums[tau] = np.sum(images, axis=0)
    residual = float(
        np.linalg.norm(sums[1] + sums[-1] - 2 * sums[0])
        / np.linalg.norm(sums[0])
    )
    status = "pass" if residual < opts.trace_tol else "fail"
    return TraceResult(status=status, residual=residual)


@dataclass
class DegreeResult:
    degree: int
    witness: WitnessSet
    trace_residual: float
    loops_used: int
    complete: bool


def hypersurface_degree(
    spec: SecantSpec,
    seed: int = 0,
    loop_budget: int = 50,
    opts: TrackOptions = TrackOptions(),
    threads: int = 1,
    force: bool = False,
    trace_retries: int = 2,
) -> DegreeResult:
    """Run the full monodromy + trace procedure for the degree of the
    secant hypersurface.

    The trace test runs whenever a loop stops producing new points (and at
    budget exhaustion); exhausting the budget without a passing trace
    reports the current count as incomplete, never as a degree.
    """
    rng = np.random.default_rng(seed)
    system, z0 = build_sliced_system(spec, rng, force=force)
    p, t, lam = system.split(z0)
    witness = WitnessSet(
        a=system.a,
        b=system.b,
        chart=system.chart,
        points=[
            WitnessPoint(params=p, t=complex(t), lam=complex(lam), image=system.image_of(z0))
        ],
        seed=seed,
        dedup_tol=opts.dedup_tol,
    )
    loops = 0
    residual = None
    while loops < loop_budget:
        grown = monodromy_loop(system, witness, rng, opts, threads)
        loops += 1
        stalled = len(grown) == len(witness)
        witness = grown
        if not stalled:
            continue
        outcome = TraceResult(status="inconclusive")
        for _ in range(trace_retries):
            outcome = trace_test(system, witness, rng, opts, threads)
            if outcome.status != "inconclusive":
                break
        if outcome.status == "pass":
            witness.trace_residual = outcome.residual
            return DegreeResult(
                degree=len(witness),
                witness=witness,
                trace_residual=outcome.residual,
                loops_used=loops,
                complete=True,
            )
        residual = outcome.residual
    witness.trace_residual = residual
    return DegreeResult(
        degree=len(witness),
        witness=witness,
        trace_residual=residual,
        loops_used=loops,
        complete=False,
    )
