"""Declarative prediction scenarios: strict JSON in, rendered report out.

A scenario document has exactly four top-level fields::

    {"name": "...", "kind": "cotter-pin", "parameters": {...},
     "output": {"format": "markdown", "precision": 4}}

``output`` may be omitted or partial; missing entries take the defaults.
Every other field is checked by kind, and unknown fields anywhere are an
error naming their path.
"""

import json
import math
from dataclasses import dataclass, field
from numbers import Real

from transduct import engine
from transduct.errors import ScenarioError
from transduct.report import (
    DEFAULT_PRECISION,
    FORMATS,
    format_sig,
    render,
    render_csv,
    render_markdown,
    run_cotter_pin,
)

KINDS = ("cotter-pin", "discrete-models", "normal-grid", "outlier-mixture")
TOP_LEVEL = ("name", "kind", "parameters", "output")


class ScenarioSyntaxError(ScenarioError):
    pass


class UnknownKindError(ScenarioError):
    pass


class MissingFieldError(ScenarioError):
    pass


class UnknownFieldError(ScenarioError):
    pass


class InvalidValueError(ScenarioError):
    pass


@dataclass(frozen=True)
class OutputSpec:
    format: str = "markdown"
    precision: int = DEFAULT_PRECISION


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    kind: str
    parameters: dict
    output: OutputSpec = field(default_factory=OutputSpec)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "parameters": self.parameters,
            "output": {"format": self.output.format, "precision": self.output.precision},
        }


# --- field validators ----------------------------------------------------------

_REQUIRED = object()


def _int(path, v, minimum=None):
    if isinstance(v, bool) or not isinstance(v, int):
        raise InvalidValueError(f"expected an integer, got {v!r}", path)
    if minimum is not None and v < minimum:
        raise InvalidValueError(f"must be >= {minimum}, got {v}", path)
    return v


def _real(path, v):
    if isinstance(v, bool) or not isinstance(v, Real) or not math.isfinite(v):
        raise InvalidValueError(f"expected a finite number, got {v!r}", path)
    return float(v)


def _list(path, v):
    if not isinstance(v, list):
        raise InvalidValueError(f"expected a list, got {type(v).__name__}", path)
    return v


def _pair(path, v):
    v = _list(path, v)
    if len(v) != 2:
        raise InvalidValueError(f"expected [lo, hi], got {len(v)} entries", path)
    lo, hi = (_real(f"{path}[{i}]", x) for i, x in enumerate(v))
    if lo > hi:
        raise InvalidValueError(f"lo must not exceed hi, got [{lo}, {hi}]", path)
    return [lo, hi]


def _probability(path, v, upper_open=True):
    x = _real(path, v)
    if not (0.0 <= x < 1.0 if upper_open else 0.0 <= x <= 1.0):
        raise InvalidValueError(f"expected a probability, got {x}", path)
    return x


def _choice(options):
    def check(path, v):
        if v not in options:
            raise InvalidValueError(f"expected one of {list(options)}, got {v!r}", path)
        return v
    return check


def _scalar_outcome(path, v):
    if isinstance(v, bool) or not isinstance(v, (str, int, float)):
        raise InvalidValueError(f"outcomes must be strings or numbers, got {v!r}", path)
    return v


def _n0_list(path, v):
    return [_int(f"{path}[{i}]", x, minimum=1) for i, x in enumerate(_list(path, v))]


def _reals(path, v):
    return [_real(f"{path}[{i}]", x) for i, x in enumerate(_list(path, v))]


def _grid_sizes(path, v):
    v = _list(path, v)
    if len(v) != 2:
        raise InvalidValueError("expected [mean_points, variance_points]", path)
    return [_int(f"{path}[{i}]", x, minimum=1) for i, x in enumerate(v)]


def _outlier_probs(path, v):
    v = _list(path, v)
    if not v:
        raise InvalidValueError("need at least one outlier probability", path)
    return [_probability(f"{path}[{i}]", x) for i, x in enumerate(v)]


def _model_entry(path, v):
    if not isinstance(v, dict):
        raise InvalidValueError("each model must be an object", path)
    return _fields(path, v, {
        "id": (lambda p, x: _scalar_outcome(p, x), _REQUIRED),
        "prior": (lambda p, x: _nonneg(p, x), _REQUIRED),
        "likelihood": (lambda p, x: [_probability(f"{p}[{i}]", y, upper_open=False)
                                     for i, y in enumerate(_list(p, x))], _REQUIRED),
    })


def _nonneg(path, v):
    x = _real(path, v)
    if x < 0.0:
        raise InvalidValueError(f"must be >= 0, got {x}", path)
    return x


def _models(path, v):
    v = _list(path, v)
    if not v:
        raise InvalidValueError("need at least one model", path)
    return [_model_entry(f"{path}[{i}]", m) for i, m in enumerate(v)]


_GRID_FIELDS = {
    "mean_range": (_pair, _REQUIRED),
    "variance_range": (_pair, _REQUIRED),
    "grid_sizes": (_grid_sizes, _REQUIRED),
    "prior": (_choice(("uniform", "inverse-variance")), "uniform"),
    "observed": (_reals, []),
}

SCHEMAS = {
    "cotter-pin": {
        "n0": (_n0_list, _REQUIRED),
        "ratio": (_real, _REQUIRED),
        "n": (lambda p, v: _int(p, v, minimum=1), _REQUIRED),
        "threshold": (lambda p, v: _int(p, v, minimum=0), _REQUIRED),
        "pseudo_count": (_nonneg, 0.0),
    },
    "discrete-models": {
        "outcomes": (lambda p, v: [_scalar_outcome(f"{p}[{i}]", x) for i, x in enumerate(_list(p, v))], _REQUIRED),
        "models": (_models, _REQUIRED),
        "observed": (lambda p, v: [_scalar_outcome(f"{p}[{i}]", x) for i, x in enumerate(_list(p, v))], []),
        "values": (_reals, None),
    },
    "normal-grid": dict(_GRID_FIELDS),
    "outlier-mixture": {
        **_GRID_FIELDS,
        "outlier_probs": (_outlier_probs, _REQUIRED),
        "outlier_support": (_pair, _REQUIRED),
    },
}


def _fields(path, obj, schema):
    prefix = f"{path}." if path else ""
    for key in obj:
        if key not in schema:
            raise UnknownFieldError(f"unknown field {key!r}", f"{prefix}{key}")
    out = {}
    for key, (check, default) in schema.items():
        if key in obj:
            out[key] = check(f"{prefix}{key}", obj[key])
        elif default is _REQUIRED:
            raise MissingFieldError(f"missing required field {key!r}", f"{prefix}{key}")
        elif default is not None:
            out[key] = default if not isinstance(default, list) else list(default)
    return out


def _cross_checks(kind, params):
    if kind == "cotter-pin":
        if not 0.0 < params["ratio"] < 1.0:
            raise InvalidValueError("ratio must lie in (0, 1)", "parameters.ratio")
        if params["threshold"] >= params["n"]:
            raise InvalidValueError("threshold must be < n", "parameters.threshold")
    elif kind == "discrete-models":
        outcomes = params["outcomes"]
        if len(set(outcomes)) != len(outcomes) or not outcomes:
            raise InvalidValueError("outcomes must be distinct and non-empty", "parameters.outcomes")
        ids = [m["id"] for m in params["models"]]
        if len(set(ids)) != len(ids):
            raise InvalidValueError("model ids must be unique", "parameters.models")
        for i, m in enumerate(params["models"]):
            path = f"parameters.models[{i}].likelihood"
            if len(m["likelihood"]) != len(outcomes):
                raise InvalidValueError("one probability per outcome is required", path)
            if abs(math.fsum(m["likelihood"]) - 1.0) > 1e-9:
                raise InvalidValueError("likelihood must sum to 1", path)
        if not any(m["prior"] > 0 for m in params["models"]):
            raise InvalidValueError("at least one prior weight must be positive", "parameters.models")
        for i, o in enumerate(params["observed"]):
            if o not in outcomes:
                raise InvalidValueError(f"{o!r} is not a declared outcome", f"parameters.observed[{i}]")
        if "values" in params and len(params["values"]) != len(outcomes):
            raise InvalidValueError("one value per outcome is required", "parameters.values")
    else:
        for axis, size in zip(("mean_range", "variance_range"), params["grid_sizes"]):
            lo, hi = params[axis]
            if (size == 1) != (lo == hi):
                raise InvalidValueError(
                    "a single grid point needs lo == hi; otherwise lo < hi and >= 2 points",
                    f"parameters.{axis}")
        if params["variance_range"][0] <= 0.0:
            raise InvalidValueError("variances must be > 0", "parameters.variance_range")
        if kind == "outlier-mixture" and not params["outlier_support"][0] < params["outlier_support"][1]:
            raise InvalidValueError("support needs lo < hi", "parameters.outlier_support")


def _reject_duplicates(pairs):
    seen = {}
    for k, v in pairs:
        if k in seen:
            raise ScenarioSyntaxError(f"duplicate key {k!r}")
        seen[k] = v
    return seen


def parse_scenario(text: str) -> ScenarioSpec:
    try:
        doc = json.loads(text, object_pairs_hook=_reject_duplicates)
    except json.JSONDecodeError as exc:
        raise ScenarioSyntaxError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    if not isinstance(doc, dict):
        raise ScenarioSyntaxError("scenario must be a JSON object")
    for key in doc:
        if key not in TOP_LEVEL:
            raise UnknownFieldError(f"unknown field {key!r}", key)
    for key in ("name", "kind", "parameters"):
        if key not in doc:
            raise MissingFieldError(f"missing required field {key!r}", key)
    if not isinstance(doc["name"], str):
        raise InvalidValueError("name must be a string", "name")
    kind = doc["kind"]
    if kind not in KINDS:
        raise UnknownKindError(f"unknown kind {kind!r}; expected one of {list(KINDS)}", "kind")
    if not isinstance(doc["parameters"], dict):
        raise InvalidValueError("parameters must be an object", "parameters")
    params = _fields("parameters", doc["parameters"], SCHEMAS[kind])
    _cross_checks(kind, params)

    output = doc.get("output", {})
    if not isinstance(output, dict):
        raise InvalidValueError("output must be an object", "output")
    out = _fields("output", output, {
        "format": (_choice(FORMATS), "markdown"),
        "precision": (lambda p, v: _int(p, v, minimum=1), DEFAULT_PRECISION),
    })
    return ScenarioSpec(doc["name"], kind, params, OutputSpec(**out))


def serialize_scenario(spec: ScenarioSpec) -> str:
    """Canonical form: defaults filled in, fixed key order, two-space indent."""
    return json.dumps(spec.to_dict(), indent=2) + "\n"


# --- execution -----------------------------------------------------------------


def _render_sections(sections, fmt, precision):
    """``sections`` is a list of ``(title, header, rows)``; numbers get rounded."""
    def cell(v):
        if isinstance(v, float):
            return format_sig(v, precision)
        return str(v).lower() if isinstance(v, bool) else str(v)

    if fmt == "json":
        def jval(v):
            if isinstance(v, float):
                s = format_sig(v, precision)
                return s if s in ("inf", "-inf", "nan") else float(s)
            return v
        doc = {title: [dict(zip(header, (jval(v) for v in row))) for row in rows]
               for title, header, rows in sections}
        return json.dumps(doc, indent=2) + "\n"
    parts = []
    for title, header, rows in sections:
        cells = [[cell(v) for v in row] for row in rows]
        if fmt == "csv":
            parts.append(f"# {title}\n" + render_csv(header, cells))
        else:
            parts.append(f"### {title}\n\n" + render_markdown(header, cells))
    return "\n".join(parts)


def discrete_report(params):
    """Prior, posterior, averaged and single-best predictions for an explicit model table."""
    outcomes = params["outcomes"]
    table = {m["id"]: m["likelihood"] for m in params["models"]}
    priors = {m["id"]: m["prior"] for m in params["models"]}
    space = engine.tabulated_space(outcomes, table, priors, params.get("values"))
    observed = params["observed"]
    post = engine.posterior(space, observed)
    prior_pred = engine.prior_predictive(space, outcomes)
    trans = engine.posterior_predictive(space, observed, outcomes)
    abd = engine.abductive_predictive(space, observed, outcomes)
    models = [(mid, float(a), float(b)) for mid, a, b in zip(space.ids, space.weights, post.weights)]
    preds = [(o, float(p), float(t), float(a))
             for o, p, t, a in zip(outcomes, prior_pred.probs, trans.probs, abd.probs)]
    summary = [
        ("observed", len(observed)),
        ("map_model", abd.info["model_id"]),
        ("map_tie", abd.info["tie"]),
        ("total_variation", trans.total_variation(abd)),
    ]
    return [
        ("models", ("model", "prior", "posterior"), models),
        ("predictive", ("outcome", "prior_predictive", "transductive", "abductive"), preds),
        ("summary", ("quantity", "value"), summary),
    ]


def grid_report(kind, params):
    """Predictive moments with their two variance sources, averaged vs single best model."""
    if kind == "normal-grid":
        space = engine.normal_grid_space(params["mean_range"], params["variance_range"],
                                         params["grid_sizes"], params["prior"])
    else:
        space = engine.outlier_mixture_grid_space(params["mean_range"], params["variance_range"],
                                                  params["grid_sizes"], params["outlier_probs"],
                                                  params["outlier_support"], params["prior"])
    observed = params["observed"]
    moments = engine.predictive_moments(space, observed)
    best = engine.map_model(space, observed)
    row = space.params[best["index"]: best["index"] + 1]
    best_mean = float(space.family.means(row)[0])
    best_var = float(space.family.variances(row)[0])
    try:
        kurt = engine.predictive_excess_kurtosis(space, observed)
    except ValueError:
        kurt = math.nan
    rows = [
        ("mean", moments.mean, best_mean),
        ("variance", moments.variance, best_var),
        ("within_model_variance", moments.within_model_variance, best_var),
        ("between_model_variance", moments.between_model_variance, 0.0),
        ("excess_kurtosis", kurt, 0.0 if kind == "normal-grid" else math.nan),
    ]
    summary = [
        ("models", len(space)),
        ("observed", len(observed)),
        ("map_model", ", ".join(format(v, ".6g") for v in row[0])),
        ("map_tie", best["tie"]),
    ]
    return [
        ("moments", ("quantity", "transductive", "abductive"), rows),
        ("summary", ("quantity", "value"), summary),
    ]


def pseudo_count_note(spec: ScenarioSpec):
    pc = spec.parameters.get("pseudo_count", 0.0) if spec.kind == "cotter-pin" else 0.0
    if pc:
        return f"note: pseudo-count mode active, {pc:g} phantom defects and good items added to every prior sample"
    return None


def run_scenario(spec: ScenarioSpec) -> str:
    fmt, precision = spec.output.format, spec.output.precision
    p = spec.parameters
    if spec.kind == "cotter-pin":
        rows = run_cotter_pin(p["n0"], p["ratio"], p["n"], p["threshold"], p["pseudo_count"])
        text = render(rows, fmt, precision)
        note = pseudo_count_note(spec)
        if note and fmt == "markdown":
            text = f"> {note}\n\n" + text
        return text
    if spec.kind == "discrete-models":
        return _render_sections(discrete_report(p), fmt, precision)
    return _render_sections(grid_report(spec.kind, p), fmt, precision)
