"""Scenario documents: JSON parsing, validation and data generation.

A scenario is a JSON object::

    {
      "name": "mcar01_trivariate",
      "dimension": 3,
      "n": 100, "m": 50,
      "replicates": 2000,
      "alpha": 0.05,
      "seed": 20240101,
      "procedures": ["cc_alg1", "cc_alg2", "w_alg1", "w_alg2", "mean", "median", "6nn"],
      "distributions": ["N(0,I)", "N(0,C1)", {"label": "shift", "kind": "multivariate_normal",
                                              "mean": [1, 0, 0], "cov": "I"}],
      "pairs": "all",
      "missingness": {"mechanism": "mcar", "p": 0.1}
    }

``pairs`` is ``"all"`` (every ordered pair), ``"diagonal"`` (null cells
only) or a list of ``[x_label, y_label]``. ``missingness`` applies to both
samples; ``missingness_x`` / ``missingness_y`` override it per side. Column
indices are 0-based. Finite populations are declared under ``populations``
and referenced as ``{"population": "white"}``::

    "populations": {"white": {"path": "winequality-white.csv",
                              "columns": ["pH", "sulphates", "alcohol"]}}

Relative paths are resolved against the scenario file; ``$VARS`` are expanded.
Unknown keys are rejected with their key path.
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..data import build_sample, read_table
from ..distributions import PRESET_COVARIANCES, PRESET_MEANS, Dgp, from_alias, normal, student_t
from ..exceptions import EnergyMissingError, IngestionError, ScenarioError
from ..missingness import MECHANISMS, MissingnessSpec, calibrate_logistic_intercept
from ..resampling import STUDY_LABELS, procedure_from_label

DEFAULT_COLUMNS = ("pH", "sulphates", "alcohol")

_TOP_KEYS = {
    "name", "dimension", "n", "m", "replicates", "alpha", "seed", "procedures",
    "distributions", "pairs", "missingness", "missingness_x", "missingness_y",
    "populations", "description",
}
_MISSING_KEYS = {
    "mcar": {"mechanism", "p"},
    "mar_1to9": {"mechanism", "p", "control", "targets"},
    "mar_rank": {"mechanism", "p", "control", "targets"},
    "mar_logistic": {"mechanism", "controls", "targets", "intercept", "slopes",
                     "target_rate", "calibration_draws"},
}
_DIST_KEYS = {"label", "kind", "mean", "cov", "df", "alias", "population"}
_POP_KEYS = {"path", "columns", "delimiter"}


@dataclass(frozen=True)
class PopulationSource:
    path: str
    columns: tuple = DEFAULT_COLUMNS
    label: str = ""
    delimiter: Optional[str] = None


@dataclass(frozen=True)
class Population:
    """A finite population sampled with replacement."""

    label: str
    data: np.ndarray

    @property
    def d(self):
        return self.data.shape[1]

    def sample(self, n, rng):
        return self.data[rng.integers(0, self.data.shape[0], size=n)]


def load_population(src: PopulationSource) -> Population:
    """Read the selected columns of a delimited file as a complete matrix."""
    columns, sample = read_table(src.path, delimiter=src.delimiter, header=True)
    missing = [c for c in src.columns if c not in columns]
    if missing:
        raise IngestionError(f"{src.path}: column(s) {missing} not found in {columns}")
    idx = [columns.index(c) for c in src.columns]
    values = sample.values[:, idx]
    if np.isnan(values).any():
        row, col = np.argwhere(np.isnan(values))[0]
        raise IngestionError(
            f"{src.path}: missing value at row {row + 2}, column {src.columns[col]!r}"
        )
    return Population(src.label or Path(src.path).stem, values)


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    sources: dict
    pairs: tuple
    n: int
    m: int
    missingness_x: MissingnessSpec
    missingness_y: MissingnessSpec
    procedures: tuple
    N: int
    alpha: float
    seed: int
    document: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def labels(self):
        return list(self.sources)

    @property
    def logistic(self):
        return "mar_logistic" in (self.missingness_x.mechanism, self.missingness_y.mechanism)

    def config_hash(self):
        text = json.dumps(self.document, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


class CellGenerator:
    """Picklable ``generate(rng) -> (x, y)`` for one cell of a scenario."""

    def __init__(self, source_x, source_y, n, m, miss_x, miss_y):
        self.source_x = source_x
        self.source_y = source_y
        self.n = n
        self.m = m
        self.miss_x = miss_x
        self.miss_y = miss_y

    def __call__(self, rng):
        X = self.source_x.sample(self.n, rng)
        Y = self.source_y.sample(self.m, rng)
        x = self.miss_x.apply(build_sample(X), rng)
        y = self.miss_y.apply(build_sample(Y), rng)
        return x, y


# --- validation helpers -------------------------------------------------------


def _fail(path, msg):
    raise ScenarioError(msg, path)


def _check_keys(obj, allowed, path):
    if not isinstance(obj, dict):
        _fail(path, f"expected an object, got {type(obj).__name__}")
    for key in obj:
        if key not in allowed:
            _fail(f"{path}.{key}" if path else key, "unknown key")


def _int(obj, key, path, minimum=None, default=None):
    if key not in obj:
        if default is None:
            _fail(_join(path, key), "required key is missing")
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, int):
        _fail(_join(path, key), f"expected an integer, got {val!r}")
    if minimum is not None and val < minimum:
        _fail(_join(path, key), f"must be at least {minimum}, got {val}")
    return val


def _number(val, path):
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        _fail(path, f"expected a number, got {val!r}")
    return float(val)


def _join(path, key):
    return f"{path}.{key}" if path else str(key)


def _index_list(val, path, d):
    if isinstance(val, int) and not isinstance(val, bool):
        val = [val]
    if not isinstance(val, list) or not val:
        _fail(path, "expected a non-empty list of column indices")
    for i, c in enumerate(val):
        if isinstance(c, bool) or not isinstance(c, int) or not 0 <= c < d:
            _fail(f"{path}[{i}]", f"column index must be an integer in [0, {d - 1}]")
    return tuple(val)


def parse_missingness(obj, path, d, seed=0) -> MissingnessSpec:
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    mech = obj.get("mechanism")
    if mech not in MECHANISMS:
        _fail(_join(path, "mechanism"), f"must be one of {list(MECHANISMS)}, got {mech!r}")
    _check_keys(obj, _MISSING_KEYS[mech], path)
    try:
        if mech == "mcar":
            p = obj.get("p", 0.0)
            if isinstance(p, list):
                if len(p) != d:
                    _fail(_join(path, "p"), f"expected {d} probabilities, got {len(p)}")
                p = tuple(_number(v, f"{path}.p[{i}]") for i, v in enumerate(p))
            else:
                p = _number(p, _join(path, "p"))
            return MissingnessSpec("mcar", p)
        if mech in ("mar_1to9", "mar_rank"):
            if "control" not in obj:
                _fail(_join(path, "control"), "required key is missing")
            (control,) = _index_list(obj["control"], _join(path, "control"), d)
            targets = _index_list(obj.get("targets"), _join(path, "targets"), d)
            p = _number(obj.get("p", 0.0), _join(path, "p"))
            if mech == "mar_1to9" and 9 * p / 5 > 1:
                _fail(_join(path, "p"), f"rate {p} needs an upper-group rate 9p/5 > 1")
            return MissingnessSpec(mech, p, control=control, targets=targets)
        controls = _index_list(obj.get("controls"), _join(path, "controls"), d)
        targets = _index_list(obj.get("targets"), _join(path, "targets"), d)
        slopes = obj.get("slopes")
        if not isinstance(slopes, list):
            _fail(_join(path, "slopes"), "expected a list of numbers")
        slopes = tuple(_number(v, f"{path}.slopes[{i}]") for i, v in enumerate(slopes))
        if len(slopes) != len(controls):
            _fail(_join(path, "slopes"), "need one slope per control column")
        if "intercept" in obj:
            intercept = _number(obj["intercept"], _join(path, "intercept"))
        elif "target_rate" in obj:
            rate = _number(obj["target_rate"], _join(path, "target_rate"))
            draws = _int(obj, "calibration_draws", path, minimum=1000, default=200_000)
            intercept = calibrate_logistic_intercept(
                rate, slopes, controls=list(controls), mc_size=draws, rng=seed
            )
        else:
            _fail(_join(path, "intercept"), "give either intercept or target_rate")
        return MissingnessSpec("mar_logistic", controls=controls, targets=targets,
                               intercept=intercept, slopes=slopes)
    except ScenarioError:
        raise
    except EnergyMissingError as exc:
        _fail(path, str(exc))


def _parse_distribution(obj, path, d, populations):
    if isinstance(obj, str):
        obj = {"alias": obj}
    _check_keys(obj, _DIST_KEYS, path)
    try:
        if "population" in obj:
            name = obj["population"]
            if name not in populations:
                _fail(_join(path, "population"), f"unknown population {name!r}")
            return obj.get("label", name), populations[name]
        if "alias" in obj:
            dgp = from_alias(obj["alias"], d)
            return obj.get("label", dgp.label), dgp
        kind = obj.get("kind", "multivariate_normal")
        if "label" not in obj:
            _fail(_join(path, "label"), "explicit distributions need a label")
        mean = obj.get("mean", "0")
        cov = obj.get("cov", "I")
        if isinstance(mean, str):
            mean = np.zeros(d) if mean == "0" else PRESET_MEANS.get(mean)
            if mean is None:
                _fail(_join(path, "mean"), f"unknown mean preset {obj['mean']!r}")
        if isinstance(cov, str):
            cov = np.eye(d) if cov == "I" else PRESET_COVARIANCES.get(cov)
            if cov is None:
                _fail(_join(path, "cov"), f"unknown covariance preset {obj['cov']!r}")
        if kind == "multivariate_normal":
            dgp = normal(mean, cov, label=obj["label"])
        elif kind == "multivariate_t":
            if "df" not in obj:
                _fail(_join(path, "df"), "multivariate_t needs df")
            dgp = student_t(_number(obj["df"], _join(path, "df")), mean, cov, label=obj["label"])
        else:
            _fail(_join(path, "kind"), f"unknown kind {kind!r}")
        return obj["label"], dgp
    except ScenarioError:
        raise
    except EnergyMissingError as exc:
        _fail(path, str(exc))


def _parse_populations(obj, base_dir):
    out = {}
    if not isinstance(obj, dict):
        _fail("populations", "expected an object")
    for name, entry in obj.items():
        path = f"populations.{name}"
        _check_keys(entry, _POP_KEYS, path)
        if "path" not in entry:
            _fail(_join(path, "path"), "required key is missing")
        file = Path(os.path.expandvars(str(entry["path"])))
        if not file.is_absolute() and base_dir is not None:
            file = Path(base_dir) / file
        columns = entry.get("columns", list(DEFAULT_COLUMNS))
        if not isinstance(columns, list) or not all(isinstance(c, str) for c in columns):
            _fail(_join(path, "columns"), "expected a list of column names")
        out[name] = PopulationSource(str(file), tuple(columns), name, entry.get("delimiter"))
    return out


def parse_scenario(doc, base_dir=None) -> ScenarioSpec:
    """Validate a scenario document (already decoded from JSON)."""
    _check_keys(doc, _TOP_KEYS, "")
    name = doc.get("name", "scenario")
    if not isinstance(name, str) or not name:
        _fail("name", "expected a non-empty string")
    n = _int(doc, "n", "", minimum=2)
    m = _int(doc, "m", "", minimum=2)
    N = _int(doc, "replicates", "", minimum=100)
    seed = _int(doc, "seed", "", minimum=0)
    if seed >= 2**64:
        _fail("seed", "must fit in 64 bits")
    alpha = _number(doc.get("alpha", 0.05), "alpha")
    if not 0 < alpha < 1:
        _fail("alpha", f"must lie in (0, 1), got {alpha}")

    procs = doc.get("procedures", list(STUDY_LABELS))
    if not isinstance(procs, list) or not procs:
        _fail("procedures", "expected a non-empty list of procedure labels")
    procedures = []
    for i, label in enumerate(procs):
        try:
            procedures.append(procedure_from_label(str(label), alpha=alpha))
        except EnergyMissingError as exc:
            _fail(f"procedures[{i}]", str(exc))
    if len({p.label for p in procedures}) != len(procedures):
        _fail("procedures", "duplicate procedures")

    pop_sources = _parse_populations(doc.get("populations", {}), base_dir)
    dims = {len(s.columns) for s in pop_sources.values()}
    d = doc.get("dimension")
    if d is not None:
        d = _int(doc, "dimension", "", minimum=1)
    elif len(dims) == 1:
        d = dims.pop()

    dists = doc.get("distributions")
    if not isinstance(dists, list) or not dists:
        _fail("distributions", "expected a non-empty list")
    sources = {}
    for i, entry in enumerate(dists):
        label, src = _parse_distribution(entry, f"distributions[{i}]", d, pop_sources)
        if label in sources:
            _fail(f"distributions[{i}]", f"duplicate label {label!r}")
        src_d = src.d if isinstance(src, Dgp) else len(src.columns)
        if d is None:
            d = src_d
        elif src_d != d:
            _fail(f"distributions[{i}]", f"{label!r} is {src_d}-dimensional, expected {d}")
        sources[label] = src

    pairs = doc.get("pairs", "all")
    labels = list(sources)
    if pairs == "all":
        pairs = [(a, b) for a in labels for b in labels]
    elif pairs == "diagonal":
        pairs = [(a, a) for a in labels]
    elif isinstance(pairs, list):
        checked = []
        for i, pair in enumerate(pairs):
            if (not isinstance(pair, list) or len(pair) != 2
                    or any(p not in sources for p in pair)):
                _fail(f"pairs[{i}]", f"expected [x_label, y_label] from {labels}")
            checked.append(tuple(pair))
        pairs = checked
    else:
        _fail("pairs", 'expected "all", "diagonal" or a list of label pairs')

    base = doc.get("missingness", {"mechanism": "mcar", "p": 0.0})
    miss_x = parse_missingness(doc.get("missingness_x", base),
                               "missingness_x" if "missingness_x" in doc else "missingness", d, seed)
    miss_y = parse_missingness(doc.get("missingness_y", base),
                               "missingness_y" if "missingness_y" in doc else "missingness", d, seed)

    return ScenarioSpec(
        name=name, sources=sources, pairs=tuple(pairs), n=n, m=m,
        missingness_x=miss_x, missingness_y=miss_y, procedures=tuple(procedures),
        N=N, alpha=alpha, seed=seed, document=doc,
    )


def load_scenario(path) -> ScenarioSpec:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_scenario(doc, base_dir=path.parent)


def shipped_config(name) -> Path:
    """Path of a scenario file bundled with the package."""
    path = Path(__file__).with_name("configs") / name
    if not path.suffix:
        path = path.with_suffix(".json")
    if not path.exists():
        raise ScenarioError(f"no shipped config named {name!r}")
    return path
