"""Falsification harness for the six influence axioms.

Every check takes a :class:`MeasureHandle` and returns an :class:`AxiomReport`.
Failing reports carry a witness (dataset, POI and the transformation used)
that :func:`replay` turns back into the same residual.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np

from .baselines import counterfactual_vector, lime_influence, parzen_influence
from .core import DEFAULT_KERNEL, CapacityError, Dataset, Kernel, as_vector
from .mim import mim_influence

AXIOMS = ("shift", "rotation", "continuity", "flip", "monotonicity", "nonbias")
NONBIAS_EXACT_MAX_POINTS = 12


@dataclass(frozen=True)
class MeasureHandle:
    name: str
    fn: Callable[[Dataset, int], object]

    def __call__(self, dataset: Dataset, poi: int) -> np.ndarray:
        return np.array(as_vector(self.fn(dataset, poi)), dtype=np.float64)


def mim_measure(kernel: Kernel = DEFAULT_KERNEL, name: str = "mim") -> MeasureHandle:
    return MeasureHandle(name, lambda ds, poi: mim_influence(ds, poi, kernel))


def parzen_measure(sigma: float = 0.5) -> MeasureHandle:
    return MeasureHandle(f"parzen(sigma={sigma})", lambda ds, poi: parzen_influence(ds, poi, sigma))


def lime_measure(rho: float = 3.0) -> MeasureHandle:
    return MeasureHandle(f"lime(rho={rho})", lambda ds, poi: lime_influence(ds, poi, rho))


def counterfactual_measure(tol: float = 0.0) -> MeasureHandle:
    """The dataset-level counterfactual vector, ignoring the POI."""
    return MeasureHandle("counterfactual", lambda ds, poi: counterfactual_vector(ds, tol))


def zero_measure() -> MeasureHandle:
    return MeasureHandle("zero", lambda ds, poi: np.zeros(ds.n))


@dataclass
class AxiomReport:
    axiom: str
    measure: str
    passed: bool
    residual: float
    tol: float
    vacuous: bool = False
    witness: dict | None = None
    details: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        if not self.passed:
            return "fail"
        return "pass (vacuous)" if self.vacuous else "pass"

    def to_dict(self) -> dict:
        return {
            "axiom": self.axiom,
            "details": self.details,
            "measure": self.measure,
            "passed": self.passed,
            "residual": self.residual,
            "status": self.status,
            "tol": self.tol,
            "witness": self.witness,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def reports_to_jsonl(reports: Sequence[AxiomReport]) -> str:
    return "".join(r.to_json() + "\n" for r in reports)


def _rngs(seed: int, count: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def _report(axiom, measure, residual, tol, scale, witness, details=None) -> AxiomReport:
    passed = bool(residual <= tol)
    return AxiomReport(
        axiom=axiom,
        measure=measure.name,
        passed=passed,
        residual=float(residual),
        tol=tol,
        vacuous=bool(passed and scale == 0),
        witness=None if passed else witness,
        details=details or {},
    )


def _witness(dataset: Dataset, poi: int, transform: dict) -> dict:
    return {"dataset": dataset.to_dict(), "poi": int(poi), "transform": transform}


def random_orthogonal(n: int, rng: np.random.Generator, reflect: bool | None = None) -> np.ndarray:
    """Haar-distributed orthogonal matrix; ``reflect`` forces det = -1 (True) or +1 (False)."""
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    Q = Q * np.sign(np.diag(R))
    if reflect is None:
        reflect = bool(rng.integers(2))
    if (np.linalg.det(Q) < 0) != reflect:
        Q[:, 0] = -Q[:, 0]
    return Q


# --- residuals (shared by the checks and by replay) -------------------------


def shift_residual(measure, dataset, poi, b) -> tuple[float, float]:
    b = np.asarray(b, dtype=np.float64)
    before = measure(dataset, poi)
    after = measure(dataset.replace(X=dataset.matrix() + b), poi)
    return float(np.max(np.abs(before - after))), float(np.max(np.abs(before)))


def rotation_residual(measure, dataset, poi, A) -> tuple[float, float]:
    A = np.asarray(A, dtype=np.float64)
    before = measure(dataset, poi)
    after = measure(dataset.replace(X=dataset.matrix() @ A.T), poi)
    return float(np.max(np.abs(A @ before - after))), float(np.max(np.abs(before)))


def flip_residual(measure, dataset, poi) -> tuple[float, float]:
    before = measure(dataset, poi)
    after = measure(dataset.replace(y=-dataset.y), poi)
    return float(np.max(np.abs(before - after))), float(np.max(np.abs(before)))


def continuity_residual(measure, dataset, poi, directions, epsilon) -> tuple[float, float]:
    """Extrapolated jump of the output under the perturbation ``eps * directions``.

    With ``D(e)`` the change in output at step ``e``, the combination
    ``(D(eps) - 6 D(eps/2) + 8 D(eps/4)) / 3`` cancels the linear and quadratic
    terms of a smooth response and returns ``j`` for a jump of size ``j``.
    """
    D = np.asarray(directions, dtype=np.float64)
    X = dataset.matrix()
    base = measure(dataset, poi)

    def delta(eps):
        return measure(dataset.replace(X=X + eps * D), poi) - base

    d1, d2, d4 = delta(epsilon), delta(epsilon / 2), delta(epsilon / 4)
    jump = (d1 - 6 * d2 + 8 * d4) / 3
    return float(np.max(np.abs(jump))), max(float(np.max(np.abs(base))), float(np.max(np.abs(d1))))


def monotonicity_residual(measure, dataset, poi, points, labels) -> tuple[float, float, dict]:
    """Worst violation of the sign rule (and, for one point, of colinearity)."""
    P = np.atleast_2d(np.asarray(points, dtype=np.float64))
    labels = np.asarray(labels, dtype=np.float64).reshape(-1)
    X = dataset.matrix()
    x, cx = X[poi], dataset.y[poi]
    grown = dataset.replace(X=np.vstack([X, P]), y=np.concatenate([dataset.y, labels]))
    delta = measure(grown, poi) - measure(dataset, poi)
    same = labels == cx
    violation = 0.0
    for i in range(dataset.n):
        above = P[:, i] > x[i]
        if np.all(above & same):
            violation = max(violation, -delta[i])
        elif np.all(above & ~same):
            violation = max(violation, delta[i])
    info: dict = {}
    if len(P) == 1:
        u = P[0] - x
        a = float(delta @ u / (u @ u))
        violation = max(violation, float(np.max(np.abs(delta - a * u))))
        violation = max(violation, -a if same[0] else a)
        info["coefficient"] = a
    return max(violation, 0.0), float(np.max(np.abs(delta))), info


def nonbias_expectation(measure, dataset, poi, mode="exact", seed=0, samples=2000):
    """Mean influence over uniformly random labels of the other points, POI label +1.

    Returns ``(mean, halfwidth, peak)``: ``halfwidth`` is the per-feature 99%
    confidence half-width (zeros in exact mode) and ``peak`` the largest
    absolute output seen.
    """
    m = dataset.m
    others = [j for j in range(m) if j != poi]
    base = np.empty(m)
    base[poi] = 1.0
    if mode == "exact":
        if m > NONBIAS_EXACT_MAX_POINTS:
            raise CapacityError(f"exact non-bias enumeration supports m <= {NONBIAS_EXACT_MAX_POINTS}; use mc")
        total = np.zeros(dataset.n)
        count, peak = 0, 0.0
        for signs in itertools.product((-1.0, 1.0), repeat=len(others)):
            base[others] = signs
            out = measure(dataset.replace(y=base.copy()), poi)
            total += out
            peak = max(peak, float(np.max(np.abs(out))))
            count += 1
        return total / count, np.zeros(dataset.n), peak
    if mode != "mc":
        raise ValueError("mode must be 'exact' or 'mc'")
    rng = np.random.default_rng(seed)
    outs = []
    for _ in range(samples):
        base[others] = rng.choice((-1.0, 1.0), size=len(others))
        outs.append(measure(dataset.replace(y=base.copy()), poi))
    outs = np.array(outs)
    z = NormalDist().inv_cdf(0.995)
    half = z * outs.std(axis=0, ddof=1) / np.sqrt(samples) if samples > 1 else np.full(dataset.n, np.inf)
    return outs.mean(axis=0), half, float(np.max(np.abs(outs)))


# --- checks -----------------------------------------------------------------


def check_shift(measure, dataset, poi, trials=10, seed=0, tol=1e-9) -> AxiomReport:
    worst, worst_b, scale = -1.0, None, 0.0
    for rng in _rngs(seed, trials):
        b = rng.uniform(-10, 10, size=dataset.n)
        res, s = shift_residual(measure, dataset, poi, b)
        scale = max(scale, s)
        if res > worst:
            worst, worst_b = res, b
    return _report("shift", measure, worst, tol, scale,
                   _witness(dataset, poi, {"b": worst_b.tolist()}))


def check_rotation(measure, dataset, poi, trials=10, seed=0, tol=1e-9) -> AxiomReport:
    worst, worst_A, scale = -1.0, None, 0.0
    for t, rng in enumerate(_rngs(seed, trials)):
        A = random_orthogonal(dataset.n, rng, reflect=bool(t % 2))
        res, s = rotation_residual(measure, dataset, poi, A)
        scale = max(scale, s)
        if res > worst:
            worst, worst_A = res, A
    return _report("rotation", measure, worst, tol, scale,
                   _witness(dataset, poi, {"A": worst_A.tolist()}))


def check_flip(measure, dataset, poi, tol=1e-9) -> AxiomReport:
    res, scale = flip_residual(measure, dataset, poi)
    return _report("flip", measure, res, tol, scale, _witness(dataset, poi, {}))


def check_continuity(measure, dataset, poi, epsilon=1e-6, tol=1e-9, trials=3, seed=0) -> AxiomReport:
    """Perturb every non-POI point by random vectors of norm ``epsilon``, ``epsilon / 2`` and ``epsilon / 4``."""
    worst, worst_D, scale = -1.0, None, 0.0
    for rng in _rngs(seed, trials):
        D = rng.standard_normal((dataset.m, dataset.n))
        D /= np.linalg.norm(D, axis=1, keepdims=True)
        D[poi] = 0.0
        res, s = continuity_residual(measure, dataset, poi, D, epsilon)
        scale = max(scale, s)
        if res > worst:
            worst, worst_D = res, D
    return _report("continuity", measure, worst, tol, scale,
                   _witness(dataset, poi, {"directions": worst_D.tolist(), "epsilon": epsilon}))


def _candidate(x: np.ndarray, spread: float, rng: np.random.Generator) -> np.ndarray:
    while True:
        y = x + rng.normal(scale=spread, size=x.shape)
        if np.all(y != x):
            return y


def check_monotonicity(measure, dataset, poi, candidates=20, seed=0, tol=1e-9, additions=None) -> AxiomReport:
    """Add points one at a time (or the given groups) and test the sign/colinearity rules.

    ``additions`` is an optional list of ``(points, labels)`` groups to add
    instead of random single candidates.
    """
    X = dataset.matrix()
    x = X[poi]
    if additions is None:
        spread = float(np.std(X)) or 1.0
        additions = []
        for rng in _rngs(seed, candidates):
            additions.append(([_candidate(x, spread, rng)], [float(rng.choice((-1.0, 1.0)))]))
    worst, worst_add, scale = -1.0, None, 0.0
    coefficients = []
    for points, labels in additions:
        res, s, info = monotonicity_residual(measure, dataset, poi, points, labels)
        scale = max(scale, s)
        if "coefficient" in info:
            coefficients.append(info["coefficient"])
        if res > worst:
            worst = res
            worst_add = {"points": np.atleast_2d(points).tolist(), "labels": np.ravel(labels).tolist()}
    details = {"coefficients": coefficients} if coefficients else {}
    return _report("monotonicity", measure, worst, tol, scale, _witness(dataset, poi, worst_add), details)


def check_nonbias(measure, dataset, poi, mode="exact", seed=0, tol=1e-9, samples=2000) -> AxiomReport:
    details = {"poi_label": 1.0, "mode": mode}
    if dataset.m == 1:
        return AxiomReport("nonbias", measure.name, True, 0.0, tol, vacuous=True, details=details)
    mean, half, peak = nonbias_expectation(measure, dataset, poi, mode, seed, samples)
    details["mean"] = mean.tolist()
    if mode == "mc":
        details["ci99_halfwidth"] = half.tolist()
    excess = float(np.max(np.abs(mean) - half))
    residual = float(np.max(np.abs(mean)))
    report = _report("nonbias", measure, max(excess, 0.0) if mode == "mc" else residual, tol,
                     peak, _witness(dataset, poi, {"mode": mode, "seed": seed, "samples": samples}), details)
    report.details["expectation_max_abs"] = residual
    return report


def run_axioms(measure, dataset, poi, axioms=AXIOMS, seed=0, tol=1e-9, nonbias_mode=None) -> list[AxiomReport]:
    if isinstance(axioms, str):
        axioms = AXIOMS if axioms == "all" else (axioms,)
    if nonbias_mode is None:
        nonbias_mode = "exact" if dataset.m <= NONBIAS_EXACT_MAX_POINTS else "mc"
    out = []
    for ax in axioms:
        if ax == "shift":
            out.append(check_shift(measure, dataset, poi, seed=seed, tol=tol))
        elif ax == "rotation":
            out.append(check_rotation(measure, dataset, poi, seed=seed, tol=tol))
        elif ax == "continuity":
            out.append(check_continuity(measure, dataset, poi, seed=seed, tol=tol))
        elif ax == "flip":
            out.append(check_flip(measure, dataset, poi, tol=tol))
        elif ax == "monotonicity":
            out.append(check_monotonicity(measure, dataset, poi, seed=seed, tol=tol))
        elif ax == "nonbias":
            out.append(check_nonbias(measure, dataset, poi, mode=nonbias_mode, seed=seed, tol=tol))
        else:
            raise ValueError(f"unknown axiom {ax!r}; choose from {AXIOMS} or 'all'")
    return out


def replay(report: AxiomReport, measure: MeasureHandle) -> float:
    """Recompute a failing report's residual from its witness."""
    if report.witness is None:
        raise ValueError("report has no witness")
    w = report.witness
    ds = Dataset.from_dict(w["dataset"])
    poi, t = w["poi"], w["transform"]
    if report.axiom == "shift":
        return shift_residual(measure, ds, poi, t["b"])[0]
    if report.axiom == "rotation":
        return rotation_residual(measure, ds, poi, t["A"])[0]
    if report.axiom == "flip":
        return flip_residual(measure, ds, poi)[0]
    if report.axiom == "continuity":
        return continuity_residual(measure, ds, poi, t["directions"], t["epsilon"])[0]
    if report.axiom == "monotonicity":
        return monotonicity_residual(measure, ds, poi, t["points"], t["labels"])[0]
    if report.axiom == "nonbias":
        mean, half, _ = nonbias_expectation(measure, ds, poi, t["mode"], t["seed"], t["samples"])
        if t["mode"] == "mc":
            return max(float(np.max(np.abs(mean) - half)), 0.0)
        return float(np.max(np.abs(mean)))
    raise ValueError(f"unknown axiom {report.axiom!r}")
