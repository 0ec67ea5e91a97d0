"""Reduce -> classify -> score experiments and their tabular reports."""
from __future__ import annotations

import csv
import enum
import io
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from .classify import KnnConfig, KrrConfig, accuracy, knn_predict, krr_fit, krr_predict
from .dataset import LabeledDataset, apply_centering, center
from .errors import InvalidInputError
from .spca import Method, SolverConfig, SolveTrace, fit_pca, fit_sparse_pca, project

Reduction = Method

METHOD_LABELS = {
    Method.PCA_BASELINE: "PCA",
    Method.ISTA: "ISTA sparse PCA",
    Method.RK_COARSE: "Coarse RK sparse PCA",
    Method.RK4: "RK4 sparse PCA",
}
SPARSE_METHODS = (Method.ISTA, Method.RK_COARSE, Method.RK4)
PAPER_D_VALUES = (20, 30, 40, 50, 60)


class Classifier(str, enum.Enum):
    KNN = "knn"
    KRR = "krr"

    @property
    def label(self):
        return {Classifier.KNN: "kNN", Classifier.KRR: "KRR"}[self]


@dataclass(frozen=True)
class ExperimentSpec:
    reduction: Method = Method.ISTA
    d: int = 20
    classifier: Classifier = Classifier.KNN
    solver: SolverConfig = field(default_factory=SolverConfig)
    knn: KnnConfig = field(default_factory=KnnConfig)
    krr: KrrConfig = field(default_factory=KrrConfig)

    def __post_init__(self):
        object.__setattr__(self, "reduction", Method(self.reduction))
        object.__setattr__(self, "classifier", Classifier(self.classifier))
        if int(self.d) < 1:
            raise InvalidInputError(f"d must be >= 1, got {self.d}")

    def describe(self):
        return f"{METHOD_LABELS[self.reduction]} (d={self.d}) + {self.classifier.label}"


@dataclass(frozen=True)
class BenchRow:
    reduction: Method
    d: int
    classifier: Classifier
    accuracy: float
    spca_seconds: float
    gradient_evals: int
    iterations: int

    def deterministic_fields(self):
        return (self.reduction, self.d, self.classifier, self.accuracy, self.gradient_evals, self.iterations)


@dataclass
class BenchReport:
    rows: list = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def timing_rows(self):
        """One row per sparse (method, d) fit, in report order."""
        seen = {}
        for r in self.rows:
            if r.reduction in SPARSE_METHODS:
                seen.setdefault((r.reduction, r.d), r)
        return list(seen.values())


class SweepError(RuntimeError):
    def __init__(self, spec, cause, partial):
        self.spec = spec
        self.cause = cause
        self.partial = partial
        super().__init__(f"sweep aborted at {spec.describe()}: {cause}")


def fit_reduction(X, reduction, d, solver):
    """Fit the basis on (centered) training features; only this is timed."""
    reduction = Method(reduction)
    if reduction is Method.PCA_BASELINE:
        start = time.perf_counter()
        basis = fit_pca(X, d)
        return basis, SolveTrace(wall_seconds=time.perf_counter() - start)
    return fit_sparse_pca(X, d, replace(solver, method=reduction))


def _prepare(train, test):
    if train.p != test.p:
        raise InvalidInputError(f"train has {train.p} features, test has {test.p}")
    ctrain, info = center(train)
    return ctrain, apply_centering(test, info)


def _score(spec, Ztrain, train, Ztest, test):
    if spec.classifier is Classifier.KNN:
        pred = knn_predict(Ztrain, train.labels, Ztest, spec.knn)
    else:
        model = krr_fit(Ztrain, train.labels, max(train.class_count, test.class_count), spec.krr)
        pred = krr_predict(model, Ztest)
    return accuracy(pred, test.labels)


def _annotate(exc, spec):
    exc.spec = spec
    if exc.args and isinstance(exc.args[0], str):
        exc.args = (f"{spec.describe()}: {exc.args[0]}",) + exc.args[1:]
    return exc


def _run_group(ctrain, ctest, specs):
    """Fit once for a (reduction, d) pair and score every classifier on it."""
    head = specs[0]
    try:
        basis, trace = fit_reduction(ctrain.features, head.reduction, head.d, head.solver)
    except Exception as exc:
        raise _annotate(exc, head)
    Ztrain = project(ctrain.features, basis)
    Ztest = project(ctest.features, basis)
    rows = []
    for spec in specs:
        try:
            acc = _score(spec, Ztrain, ctrain, Ztest, ctest)
        except Exception as exc:
            raise _annotate(exc, spec)
        rows.append(BenchRow(spec.reduction, spec.d, spec.classifier, acc,
                             trace.wall_seconds, trace.gradient_evals, trace.iterations_used))
    return rows


def run_experiment(train: LabeledDataset, test: LabeledDataset, spec: ExperimentSpec) -> BenchRow:
    ctrain, ctest = _prepare(train, test)
    return _run_group(ctrain, ctest, [spec])[0]


def run_sweep(train, test, base_spec: ExperimentSpec, d_values, reductions, classifiers,
              jobs=1, sequential_timing=False) -> BenchReport:
    """Cartesian grid in reduction-major, then d, then classifier order.

    Each (reduction, d) basis is fitted once and shared by its classifiers.
    With ``jobs > 1`` groups run on a thread pool unless ``sequential_timing``
    is set; the report order does not depend on completion order.
    """
    d_values, reductions, classifiers = list(d_values), list(reductions), list(classifiers)
    if not (d_values and reductions and classifiers):
        raise InvalidInputError("d_values, reductions and classifiers must all be non-empty")
    groups = [
        [replace(base_spec, reduction=Method(r), d=int(d), classifier=Classifier(c)) for c in classifiers]
        for r in reductions for d in d_values
    ]
    ctrain, ctest = _prepare(train, test)
    report = BenchReport()

    if jobs <= 1 or sequential_timing:
        for specs in groups:
            try:
                report.rows.extend(_run_group(ctrain, ctest, specs))
            except Exception as exc:
                raise SweepError(getattr(exc, "spec", specs[0]), exc, report) from exc
        return report

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_run_group, ctrain, ctest, specs) for specs in groups]
        for specs, fut in zip(groups, futures):
            try:
                report.rows.extend(fut.result())
            except Exception as exc:
                for f in futures:
                    f.cancel()
                raise SweepError(getattr(exc, "spec", specs[0]), exc, report) from exc
    return report


TABLE_COLUMNS = ["Method", "d", "Classifier", "Accuracy", "Seconds", "GradEvals", "Iters"]
TIMING_COLUMNS = ["Method", "d", "Seconds", "GradEvals", "Iters"]


def _cells(row):
    return [METHOD_LABELS[row.reduction], str(row.d), row.classifier.label,
            f"{row.accuracy:.2f}", f"{row.spca_seconds:.2f}", str(row.gradient_evals), str(row.iterations)]


def _timing_cells(row):
    return [METHOD_LABELS[row.reduction], str(row.d), f"{row.spca_seconds:.2f}",
            str(row.gradient_evals), str(row.iterations)]


def _markdown(header, body):
    widths = [max(len(h), *(len(r[i]) for r in body)) for i, h in enumerate(header)]
    numeric = [all(_is_number(r[i]) for r in body) for i in range(len(header))]

    def fmt(cells):
        out = [c.rjust(w) if num else c.ljust(w) for c, w, num in zip(cells, widths, numeric)]
        return "| " + " | ".join(out) + " |"

    rule = "|" + "|".join(("-" * (w + 1) + ":") if num else ("-" * (w + 2))
                          for w, num in zip(widths, numeric)) + "|"
    return "\n".join([fmt(header), rule] + [fmt(r) for r in body]) + "\n"


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def _csv(header, body):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(body)
    return buf.getvalue()


def emit_table(report: BenchReport, fmt="markdown") -> str:
    """Accuracy table at two decimals; CSV adds a full-precision ``accuracy_raw``."""
    if not report.rows:
        raise InvalidInputError("cannot emit an empty report")
    if fmt == "markdown":
        return _markdown(TABLE_COLUMNS, [_cells(r) for r in report.rows])
    if fmt == "csv":
        return _csv(TABLE_COLUMNS + ["accuracy_raw"], [_cells(r) + [repr(r.accuracy)] for r in report.rows])
    raise InvalidInputError(f"unknown table format {fmt!r}")


def emit_timing_table(report: BenchReport, fmt="markdown") -> str:
    rows = report.timing_rows()
    if not rows:
        raise InvalidInputError("report has no sparse-PCA rows to time")
    body = [_timing_cells(r) for r in rows]
    if fmt == "markdown":
        return _markdown(TIMING_COLUMNS, body)
    if fmt == "csv":
        return _csv(TIMING_COLUMNS, body)
    raise InvalidInputError(f"unknown table format {fmt!r}")
