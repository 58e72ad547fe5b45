"""Measure networks, couplings and the p-distortion functional.

A measure network is a finite node set with an arbitrary real weight
matrix (directed, signed, not necessarily metric) and a fully supported
probability measure on the nodes.  Couplings are joint distributions
with prescribed marginals; the p-distortion of a coupling measures how
far it is from being a weight-preserving map.
"""

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import (
    MarginalMismatchError,
    MeasureNotNormalizedError,
    NonPositiveMassError,
    NonSquareWeightsError,
    ParseError,
)

MEASURE_SUM_TOL = 1e-12
MEASURE_RENORM_TOL = 1e-9
MARGINAL_TOL = 1e-9


def _freeze(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class MeasureNetwork:
    """Weight matrix, node measure and optional node labels.

    Invariants (enforced at construction): weights square with finite
    entries; measure strictly positive summing to 1 within 1e-12.
    Arrays are frozen so instances are safe to share across workers.
    """

    weights: np.ndarray
    measure: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        m = np.asarray(self.measure, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise NonSquareWeightsError(
                f"weights must be square, got shape {w.shape}"
            )
        if not np.all(np.isfinite(w)):
            raise NonSquareWeightsError("weights contain non-finite entries")
        if m.ndim != 1 or m.size != w.shape[0]:
            raise NonSquareWeightsError(
                f"measure length {m.size} does not match {w.shape[0]} nodes"
            )
        if not np.all(np.isfinite(m)) or np.any(m <= 0.0):
            raise NonPositiveMassError(
                "measure entries must be strictly positive (full support)"
            )
        total = m.sum()
        if abs(total - 1.0) > MEASURE_RENORM_TOL:
            raise MeasureNotNormalizedError(
                f"measure sums to {total!r}, beyond renormalization tolerance"
            )
        if abs(total - 1.0) > MEASURE_SUM_TOL:
            m = m / total
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != w.shape[0]:
                raise NonSquareWeightsError(
                    f"{len(labels)} labels for {w.shape[0]} nodes"
                )
            object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "weights", _freeze(w))
        object.__setattr__(self, "measure", _freeze(m))

    @property
    def n(self):
        return self.weights.shape[0]


def new_network(weights, measure, labels=None) -> MeasureNetwork:
    """Validate and build a MeasureNetwork.

    The measure is renormalized when |sum - 1| <= 1e-9 and rejected
    beyond that.
    """
    return MeasureNetwork(weights, measure, labels)


def one_point_network(a, label=None) -> MeasureNetwork:
    """The one-node network with self-weight a."""
    labels = (label,) if label is not None else None
    return MeasureNetwork([[float(a)]], [1.0], labels)


@dataclass(frozen=True)
class Coupling:
    """Transport plan with its prescribed marginals.

    Row sums must match row_marginal and column sums col_marginal
    within 1e-9; entries nonnegative.
    """

    plan: np.ndarray
    row_marginal: np.ndarray
    col_marginal: np.ndarray

    def __post_init__(self):
        plan = np.asarray(self.plan, dtype=np.float64)
        mu = np.asarray(self.row_marginal, dtype=np.float64)
        nu = np.asarray(self.col_marginal, dtype=np.float64)
        if plan.ndim != 2 or plan.shape != (mu.size, nu.size):
            raise MarginalMismatchError(
                f"plan shape {plan.shape} does not match marginals "
                f"({mu.size}, {nu.size})"
            )
        if np.any(plan < 0.0) or not np.all(np.isfinite(plan)):
            raise MarginalMismatchError("plan entries must be finite and >= 0")
        row_err = np.abs(plan.sum(axis=1) - mu).max()
        col_err = np.abs(plan.sum(axis=0) - nu).max()
        if row_err > MARGINAL_TOL or col_err > MARGINAL_TOL:
            raise MarginalMismatchError(
                f"marginal errors ({row_err:.3e}, {col_err:.3e}) "
                f"exceed {MARGINAL_TOL}"
            )
        object.__setattr__(self, "plan", _freeze(plan))
        object.__setattr__(self, "row_marginal", _freeze(mu))
        object.__setattr__(self, "col_marginal", _freeze(nu))

    @property
    def shape(self):
        return self.plan.shape


def product_coupling(mu, nu) -> Coupling:
    """The independent coupling mu (x) nu (always feasible)."""
    mu = np.asarray(mu, dtype=np.float64)
    nu = np.asarray(nu, dtype=np.float64)
    return Coupling(np.outer(mu, nu), mu, nu)


def diagonal_coupling(mu) -> Coupling:
    """diag(mu), the identity coupling of a measure with itself."""
    mu = np.asarray(mu, dtype=np.float64)
    return Coupling(np.diag(mu), mu, mu)


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability distribution on the real line with finitely many atoms.

    Atoms are sorted ascending with exact duplicates merged; masses are
    strictly positive and sum to 1 within 1e-12.
    """

    atoms: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=np.float64)
        masses = np.asarray(self.masses, dtype=np.float64)
        if atoms.ndim != 1 or atoms.shape != masses.shape or atoms.size == 0:
            raise ParseError("atoms and masses must be equal-length nonempty")
        if np.any(np.diff(atoms) <= 0.0):
            raise ParseError("atoms must be strictly increasing (merged)")
        if np.any(masses <= 0.0):
            raise NonPositiveMassError("atom masses must be positive")
        if abs(masses.sum() - 1.0) > 1e-9:
            raise MeasureNotNormalizedError(
                f"atom masses sum to {masses.sum()!r}"
            )
        object.__setattr__(self, "atoms", _freeze(atoms))
        object.__setattr__(self, "masses", _freeze(masses))

    @classmethod
    def from_points(cls, locations, masses):
        """Build from unsorted locations, merging duplicate locations."""
        locations = np.asarray(locations, dtype=np.float64).ravel()
        masses = np.asarray(masses, dtype=np.float64).ravel()
        atoms, inverse = np.unique(locations, return_inverse=True)
        merged = np.zeros(atoms.size)
        np.add.at(merged, inverse, masses)
        return cls(atoms, merged)

    @property
    def cumulative(self):
        cw = np.clip(np.cumsum(self.masses), 0.0, 1.0)
        cw[-1] = 1.0
        return cw


def _check_marginals(X: MeasureNetwork, Y: MeasureNetwork, mu: Coupling):
    if mu.shape != (X.n, Y.n):
        raise MarginalMismatchError(
            f"coupling shape {mu.shape} does not match networks "
            f"({X.n}, {Y.n})"
        )
    if (
        np.abs(mu.row_marginal - X.measure).max() > MARGINAL_TOL
        or np.abs(mu.col_marginal - Y.measure).max() > MARGINAL_TOL
    ):
        raise MarginalMismatchError(
            "coupling marginals do not match the network measures"
        )


def distortion(X: MeasureNetwork, Y: MeasureNetwork, mu: Coupling, p) -> float:
    """p-distortion of a coupling.

    For finite p this is the L^p norm of omega_X(i,k) - omega_Y(j,l)
    under the product of the plan with itself; for p = inf it is the
    max over quadruples carrying positive plan mass.
    """
    _check_marginals(X, Y, mu)
    p = float(p)
    if p < 1.0:
        raise ValueError("order p must be >= 1")
    wx, wy, plan = X.weights, Y.weights, mu.plan
    if np.isinf(p):
        return _kernels.dis_sup(wx, wy, plan)
    if p == 2.0:
        # expansion |a-b|^2 = a^2 + b^2 - 2ab under plan (x) plan
        sx = float(X.measure @ (wx * wx) @ X.measure)
        sy = float(Y.measure @ (wy * wy) @ Y.measure)
        cross = float(np.sum((wx @ plan @ wy.T) * plan))
        val = sx + sy - 2.0 * cross
        # the expansion cancels catastrophically near zero; below its own
        # noise floor, resum as nonnegative quadruple terms (exact at 0)
        if val <= 64.0 * np.finfo(np.float64).eps * (sx + sy):
            val = float(_kernels.dis_pow(wx, wy, plan, 2.0))
        return float(np.sqrt(max(val, 0.0)))
    return float(_kernels.dis_pow(wx, wy, plan, p)) ** (1.0 / p)


def distortion_quad(X, Y, mu: Coupling, p) -> float:
    """Generic quadruple-sum distortion, no p=2 shortcut (cross-check path)."""
    _check_marginals(X, Y, mu)
    p = float(p)
    if np.isinf(p):
        return _kernels.dis_sup(X.weights, Y.weights, mu.plan)
    return float(_kernels.dis_pow(X.weights, Y.weights, mu.plan, p)) ** (
        1.0 / p
    )


def dnp_to_point(X: MeasureNetwork, a, p) -> float:
    """Exact GW-type distance from X to the one-node network at a."""
    a = float(a)
    p = float(p)
    diff = np.abs(X.weights - a)
    if np.isinf(p):
        return 0.5 * float(diff.max())
    outer = np.outer(X.measure, X.measure)
    return 0.5 * float(np.sum(diff**p * outer)) ** (1.0 / p)


class GpResult(NamedTuple):
    mass: float
    feasible: bool


def gp_objective(X, Y, mu: Coupling, eps, alpha) -> GpResult:
    """Evaluate the Gromov-Prokhorov feasibility test for one coupling.

    Returns the plan (x) plan mass of {|omega_X - omega_Y| >= eps} and
    whether it is at most alpha * eps.  No minimization over couplings
    is performed.
    """
    _check_marginals(X, Y, mu)
    eps = float(eps)
    alpha = float(alpha)
    if eps < 0.0 or alpha < 0.0:
        raise ValueError("eps and alpha must be >= 0")
    mass = float(_kernels.gp_mass(X.weights, Y.weights, mu.plan, eps))
    return GpResult(mass=mass, feasible=mass <= alpha * eps)


# ---------------------------------------------------------------------------
# network JSON format: {"labels": [...], "weights": [[...]], "measure": [...]}

def network_to_json(X: MeasureNetwork) -> str:
    doc = {
        "labels": list(X.labels) if X.labels is not None else None,
        "weights": X.weights.tolist(),
        "measure": X.measure.tolist(),
    }
    return json.dumps(doc, indent=1)


def network_from_json(text: str) -> MeasureNetwork:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "weights" not in doc:
        raise ParseError("network JSON must be an object with 'weights'")
    weights = doc["weights"]
    measure = doc.get("measure")
    if measure is None:
        n = len(weights)
        measure = [1.0 / n] * n
    return new_network(weights, measure, doc.get("labels"))


def save_network(X: MeasureNetwork, path):
    with open(path, "w") as fh:
        fh.write(network_to_json(X))
        fh.write("\n")


def load_network(path) -> MeasureNetwork:
    with open(path) as fh:
        return network_from_json(fh.read())
