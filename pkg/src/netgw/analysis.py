"""Pairwise dissimilarity matrices, single-linkage clustering, file io."""

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .bounds import rflb, rslb, rtlb_max, szlb
from .core import MeasureNetwork, _freeze, new_network
from .errors import DomainError, IoError, NonSquareError, ParseError
from .gw import entropic_gw
from .ot import SinkhornConfig

SYMMETRY_TOL = 1e-9
METHODS = ("szlb", "rslb", "rflb", "rtlb_max", "entropic_gw")

WORKERS_ENV = "NETGW_WORKERS"


@dataclass(frozen=True)
class DissimilarityMatrix:
    """Symmetric pairwise matrix; NaN marks a pair whose computation failed."""

    labels: tuple
    D: np.ndarray
    method: str = ""
    p: float = 2.0

    def __post_init__(self):
        D = np.asarray(self.D, dtype=np.float64)
        labels = tuple(str(label) for label in self.labels)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise NonSquareError(f"matrix must be square, got shape {D.shape}")
        if len(labels) != D.shape[0]:
            raise DomainError(f"{len(labels)} labels for a {D.shape[0]}-row matrix")
        finite = np.isfinite(D)
        if np.any(D[finite] < 0.0):
            raise DomainError("dissimilarities must be >= 0")
        if np.any(np.isinf(D)):
            raise DomainError("dissimilarities must be finite or NaN")
        if np.any(finite != finite.T):
            raise DomainError("missing entries must be symmetric")
        both = finite & finite.T
        if np.any(np.abs(np.where(both, D - D.T, 0.0)) > SYMMETRY_TOL):
            raise DomainError("matrix must be symmetric within 1e-9")
        if np.any(np.diag(D) != 0.0):
            raise DomainError("diagonal must be exactly zero")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "D", _freeze(D))

    @property
    def n(self):
        return self.D.shape[0]

    @property
    def complete(self):
        return bool(np.all(np.isfinite(self.D)))


class PairFailure(NamedTuple):
    i: int
    j: int
    label_i: str
    label_j: str
    error: str


def _pair_value(xi, xj, method, p, config):
    if method == "szlb":
        return szlb(xi, xj, p)
    if method == "rslb":
        return rslb(xi, xj, p)
    if method == "rflb":
        return max(rflb(xi, xj, p, "out"), rflb(xi, xj, p, "in"))
    if method == "rtlb_max":
        return rtlb_max(xi, xj, p, keep_couplings=False).rtlb_max
    if method == "entropic_gw":
        if p != 2.0:
            raise DomainError("entropic_gw supports p=2 only")
        # the solver estimates d_{N,2}; the matrix convention is 2*d
        return 2.0 * entropic_gw(xi, xj, config).value
    raise DomainError(f"unknown method {method!r}; available: {METHODS}")


def _pair_job(args):
    i, j, xi, xj, method, p, config = args
    try:
        return i, j, float(_pair_value(xi, xj, method, p, config)), None
    except Exception as err:  # manifest entry, never abort the sweep
        return i, j, float("nan"), f"{type(err).__name__}: {err}"


def resolve_workers(workers=None):
    """CLI/API worker count: explicit arg, else NETGW_WORKERS, else 1."""
    if workers is None:
        raw = os.environ.get(WORKERS_ENV, "")
        try:
            workers = int(raw) if raw else 1
        except ValueError:
            workers = 1
    return max(1, int(workers))


def dissimilarity_matrix(
    networks,
    method: str,
    p: float = 2.0,
    labels=None,
    workers=None,
    config: SinkhornConfig | None = None,
):
    """All-pairs comparison.  Returns (matrix, failure manifest).

    A pair that raises becomes a NaN entry plus a PairFailure record;
    the other pairs still complete.  workers > 1 fans the pairs out to
    a process pool.
    """
    networks = list(networks)
    if not networks:
        raise DomainError("need at least one network")
    for k, net in enumerate(networks):
        if not isinstance(net, MeasureNetwork):
            raise DomainError(f"entry {k} is not a network")
    if labels is None:
        labels = [f"n{k}" for k in range(len(networks))]
    labels = [str(label) for label in labels]
    if len(labels) != len(networks):
        raise DomainError(f"{len(labels)} labels for {len(networks)} networks")
    if method == "entropic_gw" and config is None:
        config = SinkhornConfig(lam=100.0)
    p = float(p)

    k = len(networks)
    jobs = [
        (i, j, networks[i], networks[j], method, p, config)
        for i in range(k)
        for j in range(i + 1, k)
    ]
    workers = resolve_workers(workers)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_pair_job, jobs, chunksize=1))
    else:
        results = [_pair_job(job) for job in jobs]

    D = np.zeros((k, k))
    failures = []
    for i, j, value, error in results:
        D[i, j] = D[j, i] = value
        if error is not None:
            failures.append(PairFailure(i, j, labels[i], labels[j], error))
    matrix = DissimilarityMatrix(labels=tuple(labels), D=D, method=method, p=p)
    return matrix, tuple(failures)


@dataclass(frozen=True)
class Dendrogram:
    """Single-linkage merge history.

    Cluster ids: leaves are 0..k-1, the merge at step s creates id k+s.
    merges rows are (left id, right id, height, member count); heights
    never decrease.
    """

    leaf_labels: tuple
    merges: tuple

    def __post_init__(self):
        labels = tuple(str(label) for label in self.leaf_labels)
        merges = tuple(
            (int(a), int(b), float(h), int(size)) for a, b, h, size in self.merges
        )
        k = len(labels)
        if len(merges) != max(k - 1, 0):
            raise DomainError(f"{k} leaves need {k - 1} merges, got {len(merges)}")
        heights = [m[2] for m in merges]
        for prev, nxt in zip(heights, heights[1:]):
            if nxt < prev - 1e-12:
                raise DomainError("merge heights must be nondecreasing")
        object.__setattr__(self, "leaf_labels", labels)
        object.__setattr__(self, "merges", merges)

    @property
    def heights(self):
        return tuple(m[2] for m in self.merges)


def single_linkage(matrix: DissimilarityMatrix) -> Dendrogram:
    """Agglomerate by minimum inter-cluster distance.

    Ties go to the pair whose smallest leaf indices are lexicographically
    first, so the merge order is deterministic.
    """
    if not matrix.complete:
        raise DomainError("matrix has missing entries; cannot cluster")
    k = matrix.n
    if k < 2:
        return Dendrogram(leaf_labels=matrix.labels, merges=())
    dist = {}
    min_leaf = {i: i for i in range(k)}
    size = {i: 1 for i in range(k)}
    active = set(range(k))
    for i in range(k):
        for j in range(i + 1, k):
            dist[(i, j)] = float(matrix.D[i, j])

    def key(a, b):
        return (a, b) if a < b else (b, a)

    merges = []
    next_id = k
    while len(active) > 1:
        best = None
        for (a, b), d in dist.items():
            lo = min(min_leaf[a], min_leaf[b])
            hi = max(min_leaf[a], min_leaf[b])
            rank = (d, lo, hi)
            if best is None or rank < best[0]:
                best = (rank, a, b)
        _, a, b = best
        h = dist.pop(key(a, b))
        new = next_id
        next_id += 1
        active.discard(a)
        active.discard(b)
        for c in active:
            dist[key(new, c)] = min(dist.pop(key(a, c)), dist.pop(key(b, c)))
        active.add(new)
        min_leaf[new] = min(min_leaf[a], min_leaf[b])
        size[new] = size[a] + size[b]
        low, high = (a, b) if min_leaf[a] <= min_leaf[b] else (b, a)
        merges.append((low, high, h, size[new]))
    return Dendrogram(leaf_labels=matrix.labels, merges=tuple(merges))


def _newick_label(label):
    out = []
    for ch in label:
        out.append("_" if ch in "(),:;'\" \t\n" else ch)
    return "".join(out)


def to_newick(tree: Dendrogram) -> str:
    """Serialize with branch length = parent height - child height."""
    k = len(tree.leaf_labels)
    if k == 0:
        return ";"
    height = {i: 0.0 for i in range(k)}
    text = {i: _newick_label(tree.leaf_labels[i]) for i in range(k)}
    node = None
    for s, (a, b, h, _) in enumerate(tree.merges):
        node = k + s
        la = h - height[a]
        lb = h - height[b]
        text[node] = f"({text[a]}:{_fmt(la)},{text[b]}:{_fmt(lb)})"
        height[node] = h
    root = node if node is not None else 0
    return text[root] + ";"


def _fmt(x):
    return f"{float(x):.17g}"


def _parse_numeric_rows(lines, path):
    rows = []
    data_row = 0
    for raw in lines:
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        data_row += 1
        cells = stripped.split(",")
        parsed = []
        for c, cell in enumerate(cells, start=1):
            try:
                parsed.append(float(cell))
            except ValueError:
                raise ParseError(
                    f"{path}: bad number {cell.strip()!r} at row {data_row}, "
                    f"column {c}",
                    row=data_row,
                    col=c,
                ) from None
        rows.append(parsed)
    if not rows:
        raise ParseError(f"{path}: no data rows", row=1, col=1)
    width = len(rows[0])
    for r, row in enumerate(rows, start=1):
        if len(row) != width:
            raise ParseError(
                f"{path}: row {r} has {len(row)} cells, expected {width}",
                row=r,
                col=len(row) + 1,
            )
    return np.array(rows, dtype=np.float64)


def ingest_matrix_csv(path, measure_mode: str = "uniform") -> MeasureNetwork:
    """Read a weight matrix from CSV.

    measure_mode 'uniform' expects a square matrix; 'last-row' expects
    one extra row holding the node measure.  A comment line containing
    'measure=last-row' or 'measure=uniform' overrides the argument.
    Comment lines start with '#'.
    """
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as err:
        raise IoError(f"cannot read {path}: {err}") from err
    for raw in lines:
        stripped = raw.strip()
        if stripped.startswith("#") and "measure=" in stripped:
            measure_mode = stripped.split("measure=", 1)[1].split()[0].strip()
    if measure_mode not in ("uniform", "last-row"):
        raise ParseError(f"{path}: unknown measure mode {measure_mode!r}", row=1, col=1)
    values = _parse_numeric_rows(lines, path)
    if measure_mode == "last-row":
        if values.shape[0] != values.shape[1] + 1:
            raise NonSquareError(
                f"{path}: expected n x n weights plus one measure row, got "
                f"{values.shape[0]} rows of width {values.shape[1]}"
            )
        return new_network(values[:-1], values[-1])
    if values.shape[0] != values.shape[1]:
        raise NonSquareError(
            f"{path}: weight matrix must be square, got {values.shape}"
        )
    n = values.shape[0]
    return new_network(values, np.full(n, 1.0 / n))


def load_dissimilarity_csv(path) -> DissimilarityMatrix:
    """Read a matrix written by emit_outputs (labels live in a comment)."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as err:
        raise IoError(f"cannot read {path}: {err}") from err
    labels = None
    for raw in lines:
        stripped = raw.strip()
        if stripped.startswith("#") and "labels:" in stripped:
            labels = [s.strip() for s in stripped.split("labels:", 1)[1].split(",")]
    D = _parse_numeric_rows(lines, path)
    if D.shape[0] != D.shape[1]:
        raise NonSquareError(f"{path}: matrix must be square, got {D.shape}")
    if labels is None:
        labels = [f"n{k}" for k in range(D.shape[0])]
    if len(labels) != D.shape[0]:
        raise ParseError(
            f"{path}: {len(labels)} labels for {D.shape[0]} rows", row=1, col=1
        )
    return DissimilarityMatrix(labels=tuple(labels), D=D)


def emit_outputs(
    out_dir,
    matrix: DissimilarityMatrix | None = None,
    tree: Dendrogram | None = None,
    curves: dict | None = None,
    report: dict | None = None,
):
    """Write analysis products under out_dir; returns the paths written.

    Floats go out as %.17g so a read-back reproduces them bit for bit.
    """
    out_dir = Path(out_dir)
    written = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if matrix is not None:
            target = out_dir / "dissimilarity.csv"
            rows = ["# labels: " + ",".join(matrix.labels)]
            for r in range(matrix.n):
                rows.append(",".join(_fmt(v) for v in matrix.D[r]))
            target.write_text("\n".join(rows) + "\n")
            written.append(target)
        if tree is not None:
            target = out_dir / "dendrogram.newick"
            target.write_text(to_newick(tree) + "\n")
            written.append(target)
            target = out_dir / "merges.csv"
            rows = ["left,right,height,size"]
            for a, b, h, sz in tree.merges:
                rows.append(f"{a},{b},{_fmt(h)},{sz}")
            target.write_text("\n".join(rows) + "\n")
            written.append(target)
        if curves:
            for name, curve in curves.items():
                target = out_dir / f"curve_{name}.csv"
                rows = ["t,value"]
                for t, v in zip(curve.grid, curve.values):
                    rows.append(f"{_fmt(t)},{_fmt(v)}")
                target.write_text("\n".join(rows) + "\n")
                written.append(target)
        if report is not None:
            target = out_dir / "report.json"
            target.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
            written.append(target)
    except OSError as err:
        raise IoError(f"cannot write under {out_dir}: {err}") from err
    return [str(p) for p in written]
