"""Run configuration: TOML-style ``[section]`` / ``key = value`` text."""
from dataclasses import dataclass, field
import re

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .geometry import FAMILIES, Epigraph
from .grid import UniformGrid
from .problems import CoefficientA, NonlinearityF
from .solver import SolveConfig

SCHEMA = {
    "domain": {"family", "alpha", "r0"},
    "grid": {"origin", "h", "dims"},
    "problem": {"a", "f"},
    "solver": {"tau", "tol", "max_iter", "positivity_projection", "init"},
    "sweep": {"lambda_min", "lambda_max", "step"},
    "operator": {"check_box"},
}

INIT_KINDS = ("zero", "ones", "manufactured")


@dataclass
class RunConfig:
    epigraph: Epigraph = field(default_factory=Epigraph)
    grid: UniformGrid = None
    a: CoefficientA = None
    f: NonlinearityF = None
    solver: SolveConfig = field(default_factory=SolveConfig)
    init: str = "manufactured:scale=1e-4"
    sweep: dict = field(default_factory=dict)
    check_box: bool = True


def _line_of(text, key, section=None):
    pat = re.compile(rf"^\s*\[\s*{re.escape(key)}\s*\]" if section is None else rf"^\s*{re.escape(key)}\s*=")
    current = None
    for no, line in enumerate(text.splitlines(), 1):
        m = re.match(r"^\s*\[\s*([^\]]+?)\s*\]", line)
        if m:
            current = m.group(1)
            if section is None and pat.match(line):
                return no
            continue
        if section is not None and current == section and pat.match(line):
            return no
    return None


def _number(text, sec, key, value, kind=float, positive=False, nonneg=False):
    line = _line_of(text, key, sec)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"invalid value: [{sec}] {key} must be a number", line)
    if kind is int and int(value) != value:
        raise ConfigError(f"invalid value: [{sec}] {key} must be an integer", line)
    if positive and not value > 0:
        raise ConfigError(f"out-of-range value: [{sec}] {key} = {value} must be > 0", line)
    if nonneg and value < 0:
        raise ConfigError(f"out-of-range value: [{sec}] {key} = {value} must be >= 0", line)
    return kind(value)


def parse_config(text):
    """Parse and validate a run configuration; nothing runs on invalid input."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"syntax error: {exc}", int(m.group(1)) if m else None) from None
    for sec, body in raw.items():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]", _line_of(text, sec))
        if not isinstance(body, dict):
            raise ConfigError(f"syntax error: {sec} must be a [section]", _line_of(text, sec, None))
        for key in body:
            if key not in SCHEMA[sec]:
                raise ConfigError(f"unknown key '{key}' in [{sec}]", _line_of(text, key, sec))
    cfg = RunConfig()

    dom = raw.get("domain", {})
    family = dom.get("family", "paraboloid")
    if family not in FAMILIES:
        raise ConfigError(f"invalid value: [domain] family must be one of {FAMILIES}", _line_of(text, "family", "domain"))
    alpha = _number(text, "domain", "alpha", dom.get("alpha", 1.0), positive=True)
    r0 = _number(text, "domain", "r0", dom.get("r0", 0.0), nonneg=True)
    cfg.epigraph = Epigraph(family, alpha, r0)

    if "grid" in raw:
        g = raw["grid"]
        for key in ("origin", "h", "dims"):
            if key not in g:
                raise ConfigError(f"missing key '{key}' in [grid]", _line_of(text, "grid"))
        h = _number(text, "grid", "h", g["h"], positive=True)
        origin, dims = g["origin"], g["dims"]
        if not isinstance(origin, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in origin):
            raise ConfigError("invalid value: [grid] origin must be an array of numbers", _line_of(text, "origin", "grid"))
        if not isinstance(dims, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in dims):
            raise ConfigError("invalid value: [grid] dims must be an array of integers", _line_of(text, "dims", "grid"))
        if len(origin) != len(dims) or not dims:
            raise ConfigError("invalid value: [grid] origin and dims must have equal, nonzero length", _line_of(text, "dims", "grid"))
        if min(dims) < 2:
            raise ConfigError("out-of-range value: [grid] dims must be >= 2", _line_of(text, "dims", "grid"))
        cfg.grid = UniformGrid(tuple(origin), h, tuple(dims))

    prob = raw.get("problem", {})
    l = cfg.epigraph.l
    try:
        if "a" in prob:
            cfg.a = CoefficientA.parse(str(prob["a"]), l=l)
        if "f" in prob:
            cfg.f = NonlinearityF.parse(str(prob["f"]))
    except ValueError as exc:
        key = "a" if "a" in prob and cfg.a is None else "f"
        raise ConfigError(f"invalid value: [problem] {exc}", _line_of(text, key, "problem")) from None

    sol = raw.get("solver", {})
    s = SolveConfig()
    if "tau" in sol:
        s.tau = _number(text, "solver", "tau", sol["tau"], positive=True)
        if s.tau > 1:
            raise ConfigError("out-of-range value: [solver] tau must lie in (0, 1]", _line_of(text, "tau", "solver"))
    if "tol" in sol:
        s.tol_residual = _number(text, "solver", "tol", sol["tol"], positive=True)
    if "max_iter" in sol:
        s.max_iter = _number(text, "solver", "max_iter", sol["max_iter"], kind=int, positive=True)
    if "positivity_projection" in sol:
        if not isinstance(sol["positivity_projection"], bool):
            raise ConfigError("invalid value: [solver] positivity_projection must be true/false", _line_of(text, "positivity_projection", "solver"))
        s.positivity_projection = sol["positivity_projection"]
    if "init" in sol:
        init = sol["init"]
        if not isinstance(init, str) or init.split(":")[0] not in INIT_KINDS:
            raise ConfigError(f"invalid value: [solver] init must start with one of {INIT_KINDS}", _line_of(text, "init", "solver"))
        cfg.init = init
    cfg.solver = s

    sw = raw.get("sweep", {})
    for key in ("lambda_min", "lambda_max"):
        if key in sw:
            cfg.sweep[key] = _number(text, "sweep", key, sw[key])
    if "step" in sw:
        cfg.sweep["step"] = _number(text, "sweep", "step", sw["step"], positive=True)
    if "lambda_min" in cfg.sweep and "lambda_max" in cfg.sweep and cfg.sweep["lambda_min"] > cfg.sweep["lambda_max"]:
        raise ConfigError("out-of-range value: [sweep] lambda_min exceeds lambda_max", _line_of(text, "lambda_min", "sweep"))

    op = raw.get("operator", {})
    if "check_box" in op:
        if not isinstance(op["check_box"], bool):
            raise ConfigError("invalid value: [operator] check_box must be true/false", _line_of(text, "check_box", "operator"))
        cfg.check_box = op["check_box"]
    return cfg


def load_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)
