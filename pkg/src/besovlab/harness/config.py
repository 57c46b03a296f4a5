"""Experiment configuration: ``key=value`` text, command-line overrides and defaults.

Sweep parameters are comma-separated lists; ``inf`` denotes infinity.  Every
experiment documents its keys in :data:`PARAMS`; unknown keys are rejected.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

from ..errors import ConfigError, UsageError

INF = math.inf

# kinds: "int", "float", "ints", "floats", "str", "bool"
_COMMON = {
    "seed": ("int", 0, "corpus / random-instance seed"),
    "profile": ("float", 1.0, "steepness a of the exp(-a/x) partition transition"),
}

_P2 = [2 ** k for k in range(4, 10)]

PARAMS = {
    "partition-check": {
        "J": ("int", 8, "number of dyadic blocks"),
        "samples": ("int", 1000, "random frequencies per invariant"),
    },
    "norm-oracle": {
        "n": ("ints", [1, 3, 4, 5, 8, 16], "mode frequencies"),
        "s": ("floats", [0.5, 2.0], "smoothness"),
        "p": ("floats", [2.0, 4.0, INF], "integrability (sampled exactly on the grid)"),
        "q": ("floats", [1.0, 2.0, INF], "summability"),
        "N": ("int", 128, "points per axis"),
        "tol": ("float", 1e-10, "relative tolerance against direct summation"),
    },
    "lemma-tlemp": {
        "n": ("ints", _P2, "frequencies, grid N = 4n"),
        "s": ("floats", [0.5, 2.0], "smoothness"),
        "p": ("floats", [2.0, INF], "integrability"),
        "q": ("floats", [1.0, 2.0, INF], "summability"),
        "a": ("float", 0.7, "phase constant"),
        "slope_tol": ("float", 0.05, "allowed |slope - s|"),
        "budget": ("float", 10.0, "two-sided constant C"),
    },
    "lemma-tlemnp": {
        "lam": ("ints", [8, 16, 32, 64, 128], "frequencies"),
        "delta": ("floats", [0.25, 0.45], "dilation exponents"),
        "sigma": ("floats", [1.25, 1.5], "smoothness"),
        "q": ("floats", [2.0, INF], "summability"),
        "a": ("float", 0.3, "phase constant"),
        "box_factor": ("float", 10.0, "box side over lam_max^delta"),
        "slope_tol": ("float", 0.1, "allowed |slope - (sigma + delta/2)|"),
        "budget": ("float", 10.0, "two-sided constant C"),
    },
    "nud-periodic": {
        "n": ("ints", _P2, "frequencies, grid N = 4n"),
        "t": ("floats", [0.0, 0.25, 0.5, 1.0], "times"),
        "s": ("float", 2.5, "smoothness"),
        "p": ("floats", [2.0, INF], "integrability"),
        "q": ("floats", [2.0], "summability"),
        "dim": ("int", 2, "2 or 3"),
        "solver_n": ("ints", [16, 32, 64], "frequencies evolved with the solver"),
        "solver_N": ("int", 256, "solver grid"),
        "dt": ("float", 0.01, "solver time step"),
        "slope_tol": ("float", 0.05, "allowed |slope + 1| at t = 0"),
        "bound_factor": ("float", 10.0, "condition (i) factor over the largest-n value"),
        "sep_factor": ("float", 0.5, "condition (iii) fraction of the asymptote"),
        "sep_min_n": ("int", 128, "smallest n entering condition (iii)"),
        "agree_tol": ("float", 1e-6, "solver vs closed form, max norm"),
    },
    "nud-nonperiodic": {
        "lam": ("ints", [8, 16, 32], "frequencies"),
        "t": ("floats", [0.5, 1.0], "times"),
        "s": ("float", 2.5, "smoothness"),
        "sigma": ("float", 1.25, "intermediate smoothness"),
        "delta": ("float", 0.25, "dilation exponent"),
        "k": ("int", 3, "upper interpolation index"),
        "q": ("float", 2.0, "summability"),
        "N": ("int", 512, "points per axis"),
        "dt": ("float", 0.01, "solver time step"),
        "box_factor": ("float", 10.0, "box side over lam^delta"),
        "slope_tol": ("float", 0.15, "allowed |slope - d2 exponent|"),
        "sep_factor": ("float", 0.5, "separation fraction"),
        "sep_min_lam": ("int", 16, "smallest lam entering the separation check"),
    },
    "holder-vanishing": {
        "n": ("int", 64, "frequency, grid N = 4n"),
        "sigma": ("floats", [0.25, 0.5, 0.75], "Hölder exponents (s = 1 + sigma)"),
        "t": ("floats", [0.0, 0.5, 1.0], "times"),
        "h_max": ("float", 1.0, "largest window"),
        "h_min": ("float", 1e-15, "smallest window (spectral sub-grid offsets)"),
        "n_h": ("int", 16, "windows, log-spaced"),
        "slack": ("float", 1.01, "bound slack factor"),
        "vanish_tol": ("float", 1e-3, "required value at the smallest window"),
    },
    "solver-verify": {
        "n": ("ints", [16, 32, 64], "family frequencies"),
        "N": ("int", 256, "points per axis"),
        "dt": ("float", 1e-3, "time step"),
        "s": ("float", 2.0, "family smoothness"),
        "tol": ("float", 1e-6, "max-norm error at t = 1"),
        "drift_tol": ("float", 1e-6, "relative energy drift"),
        "modes": ("int", 4, "band limit of the random smooth field"),
        "growth_budget": ("float", 4.0, "max_t ||u(t)||_{B^s} / ||u0||_{B^s}"),
        "conv_n": ("int", 16, "frequency for the dt sweep"),
        "conv_N": ("int", 64, "grid for the dt sweep"),
        "conv_dt": ("floats", [0.1, 0.05, 0.025, 0.0125], "time steps"),
        "order_min": ("float", 3.7, "required observed order"),
    },
    "transport-bound": {
        "instances": ("int", 20, "random advector/forcing pairs"),
        "N": ("int", 64, "points per axis"),
        "modes": ("int", 3, "band limit of random data"),
        "dt": ("float", 0.02, "transport time step"),
        "T": ("float", 1.0, "final time"),
        "sigma": ("float", 1.5, "Besov index of the bound"),
        "p": ("float", 2.0, "integrability"),
        "q": ("float", 2.0, "summability"),
        "c_budget": ("float", 100.0, "largest admissible fitted constant"),
    },
    "inequality-suite": {
        "pairs": ("int", 50, "corpus size"),
        "N": ("int", 64, "points per axis"),
        "modes": ("int", 6, "band limit"),
        "s": ("float", 1.5, "smoothness for Moser and algebra"),
        "p": ("float", 2.0, "integrability"),
        "q": ("float", 2.0, "summability"),
        "s1": ("float", 1.0, "lower interpolation index"),
        "s2": ("float", 3.0, "upper interpolation index"),
        "theta": ("float", 0.5, "interpolation weight"),
        "c_budget": ("float", 100.0, "largest admissible fitted constant"),
        "oracle_tol": ("float", 1e-10, "single-mode oracle tolerance"),
    },
    "residual-decay": {
        "lam": ("ints", [8, 16, 32], "frequencies"),
        "t": ("floats", [0.0, 0.25, 0.5, 0.75, 1.0], "times"),
        "s": ("float", 2.5, "smoothness"),
        "sigma": ("float", 1.25, "residual norm index"),
        "delta": ("float", 0.25, "dilation exponent"),
        "q": ("float", 2.0, "summability"),
        "N": ("int", 512, "points per axis"),
        "dt": ("float", 0.01, "solver time step"),
        "box_factor": ("float", 10.0, "box side over lam^delta"),
        "slope_slack": ("float", 0.2, "allowed excess over the d1 exponent"),
    },
}

QUICK = {
    "lemma-tlemp": {"n": [16, 32, 64, 128]},
    "lemma-tlemnp": {"lam": [8, 16, 32, 64]},
    "nud-periodic": {"n": [16, 32, 64, 128, 256], "solver_n": [16]},
    "nud-nonperiodic": {"lam": [8, 16], "N": 256},
    "holder-vanishing": {"t": [0.0]},
    "solver-verify": {"n": [16], "N": 64},
    "transport-bound": {"instances": 5, "N": 32},
    "inequality-suite": {"pairs": 10},
    "residual-decay": {"lam": [8, 16], "N": 256, "t": [0.0, 0.5, 1.0]},
}

EXPERIMENTS = tuple(PARAMS)


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict = field(default_factory=dict)
    out: str | None = None
    quick: bool = False

    def __getitem__(self, key):
        return self.params[key]

    def echo(self):
        return {"experiment": self.experiment, "quick": self.quick, **self.params}


def _schema(experiment):
    if experiment not in PARAMS:
        raise UsageError(f"unknown experiment {experiment!r}; choose from {', '.join(EXPERIMENTS)}")
    return {**_COMMON, **PARAMS[experiment]}


def _scalar(text, kind, key):
    t = text.strip()
    try:
        if kind in ("int", "ints"):
            return int(t)
        if t.lower() in ("inf", "+inf", "infinity"):
            return INF
        return float(t)
    except ValueError:
        raise UsageError(f"key {key!r}: cannot parse {t!r} as {kind.rstrip('s')}") from None


def _convert(key, value, kind):
    if not isinstance(value, str):
        return value
    if kind == "str":
        return value.strip()
    if kind == "bool":
        v = value.strip().lower()
        if v in ("1", "true", "yes", "on"):
            return True
        if v in ("0", "false", "no", "off"):
            return False
        raise UsageError(f"key {key!r}: cannot parse {value!r} as a boolean")
    if kind in ("ints", "floats"):
        items = [x for x in value.split(",") if x.strip()]
        return [_scalar(x, kind, key) for x in items]
    return _scalar(value, kind, key)


def parse_pairs(text):
    """``key=value`` lines; blank lines and ``#`` comments ignored."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_config(text="", flags=(), experiment=None, quick=False, out=None):
    """Build an :class:`ExperimentConfig`; ``flags`` (``key=value`` strings) override ``text``."""
    raw = parse_pairs(text) if text else {}
    for f in flags:
        if "=" not in f:
            raise UsageError(f"override {f!r} is not of the form key=value")
        k, v = f.split("=", 1)
        raw[k.strip()] = v.strip()
    name = raw.pop("experiment", None)
    if experiment is not None:
        name = experiment
    if name is None:
        raise UsageError("no experiment named")
    if "quick" in raw:
        quick = _convert("quick", raw.pop("quick"), "bool") or quick
    if "out" in raw:
        out = raw.pop("out") if out is None else out
    schema = _schema(name)
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise UsageError(f"unknown key(s) for {name}: {', '.join(unknown)}")
    params = {k: (list(v[1]) if isinstance(v[1], list) else v[1]) for k, v in schema.items()}
    if quick:
        params.update({k: (list(v) if isinstance(v, list) else v)
                       for k, v in QUICK.get(name, {}).items()})
    for k, v in raw.items():
        params[k] = _convert(k, v, schema[k][0])
    cfg = ExperimentConfig(name, params, out, quick)
    validate(cfg)
    return cfg


def _need(cond, msg):
    if not cond:
        raise ConfigError(msg)


def validate(cfg):
    """Reject empty sweeps and parameters outside the preconditions of the experiment."""
    schema = _schema(cfg.experiment)
    P = cfg.params
    for k, (kind, _, _) in schema.items():
        if kind in ("ints", "floats"):
            _need(isinstance(P[k], list) and len(P[k]) > 0, f"sweep {k!r} is empty")
    name = cfg.experiment
    for key in ("p", "q"):
        if key in P:
            vals = P[key] if isinstance(P[key], list) else [P[key]]
            _need(all(v >= 1 for v in vals), f"{key} must satisfy 1 <= {key} <= inf")
    if name in ("lemma-tlemp", "nud-periodic"):
        _need(all(n >= 2 and (n & (n - 1)) == 0 for n in P["n"]), "frequencies n must be powers of two >= 2")
    if name == "nud-periodic":
        _need(P["dim"] in (2, 3), "dim must be 2 or 3")
        if P["dim"] == 3:
            _need(max(P["n"]) <= 32 and P["solver_N"] <= 64,
                  "3D variant is limited to n <= 32 and solver grids N <= 64")
        _need(all(t >= 0 for t in P["t"]), "times must be non-negative")
        _need(all(t <= 1 for t in P["t"]), "times must satisfy t <= 1")
    if name == "lemma-tlemnp":
        _need(all(0 < d < 1 for d in P["delta"]), "0 < delta < 1")
        _need(all(s > 0 for s in P["sigma"]), "sigma > 0")
        _need(all(q >= 2 for q in P["q"]), "npest2 needs 2 <= q <= inf")
    if name == "nud-nonperiodic":
        s, sig, d, k = P["s"], P["sigma"], P["delta"], P["k"]
        _need(s > 2, "s > 2")
        _need(0 < d < 0.5, "0 < δ < 1/2")
        _need(1 < sig < min(2.0, s - 1), "1 < sigma < min{2, s-1}")
        _need(k > max(2, s), "integer k > max{2, s}")
        _need(all(0 < t <= 1 for t in P["t"]), "times must lie in (0, 1]")
    if name == "residual-decay":
        _need(P["sigma"] > 1, "sigma > 1")
        _need(0 < P["delta"] < 1, "0 < δ < 1")
        _need(all(0 <= t <= 1 for t in P["t"]), "times must lie in [0, 1]")
    if name in ("nud-nonperiodic", "residual-decay"):
        _need(all(lam >= 2 for lam in P["lam"]), "lam >= 2")
        _need(len(set(P["lam"])) >= 2, "a decay rate needs at least two distinct lam")
    if name == "holder-vanishing":
        _need(all(0 < s < 1 for s in P["sigma"]), "0 < sigma < 1")
        _need(0 < P["h_min"] < P["h_max"], "0 < h_min < h_max")
    if name == "transport-bound":
        d = 2
        _need(d / P["p"] < P["sigma"] < 1 + d / P["p"], "d/p < sigma < 1 + d/p")
        _need(P["instances"] >= 1, "instances >= 1")
    if name == "inequality-suite":
        _need(P["s"] > 2 / P["p"], "algebra property needs s > d/p")
        _need(0 <= P["theta"] <= 1, "0 <= theta <= 1")
        _need(P["pairs"] >= 1, "pairs >= 1")
    if name == "solver-verify":
        _need(len(P["conv_dt"]) >= 2, "dt sweep needs at least two steps")
