"""Run configuration: a YAML document with group, spectral, cohomology and output sections.

Exact rationals are written as strings ``"p/q"``; spectral parameters may be
real numbers, strings accepted by ``complex()`` or ``[re, im]`` pairs. Every
validation error names the offending field as a dotted path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from .errors import ConfigError, HyperscatterError
from .moebius import MoebiusMap, parse_scalar

BUNDLED = ("thin-schottky", "cohomology-table")
POLE_MARGIN = 1e-3

# truncation caps
CAPS = {"N": 14, "Q": 4096, "cheb": 64, "rho_N": 14, "fit_degree": 128, "panels": 256,
        "panel_nodes": 64, "M": 1 << 16, "NF": 4096, "K": 6}


@dataclass
class GroupConfig:
    kind: str                   # symmetric | arcs | explicit | none
    radius: float = 0.1
    n: int = 2
    arcs: list = field(default_factory=list)      # [(minus, plus)] as (center, halfwidth)
    matrices: list = field(default_factory=list)  # explicit generators
    word_cap: int = 200000
    collar_margin: float = 0.0

    def build(self):
        from .schottky import Arc, SchottkyData
        kw = {"word_cap": self.word_cap, "collar_margin": self.collar_margin}
        if self.kind == "symmetric":
            return SchottkyData.symmetric(self.radius, self.n, **kw)
        pairs = [(Arc.centered(*m), Arc.centered(*p)) for m, p in self.arcs]
        if self.kind == "arcs":
            return SchottkyData.from_arcs(pairs, **kw)
        if self.kind == "explicit":
            gens = tuple(m.to_float() if m.exact else m for m in self.matrices)
            return SchottkyData(gens, tuple(m for m, _ in pairs), tuple(p for _, p in pairs), **kw)
        raise ConfigError("no Schottky group configured", "group.kind")


@dataclass
class SpectralConfig:
    N: int = 10
    Q: int = 128
    cheb: int = 20
    rho_s0: float = 1.0
    rho_N: int = 10
    fit_degree: int = 48
    panels: int = 8
    panel_nodes: int = 12
    M: int = 4096
    NF: int = 64
    K: int = 3
    lambdas: list = field(default_factory=lambda: [0.3 + 0j])
    scan_re: tuple = (0.3, 0.3)
    scan_im: tuple = (-1.0, 1.0)
    scan_steps: tuple = (1, 21)
    eis_lambda: complex = 0.8 + 0j
    eis_points: list = field(default_factory=lambda: [(0.3, 0.4), (0.5, 1.1), (0.6, 2.0)])
    modes: list = field(default_factory=lambda: [(0, 1.0, 0.0), (1, 0.5, 0.25)])
    limit_depths: list = field(default_factory=lambda: [1, 2, 4, 6])
    poincare_exponents: list = field(default_factory=lambda: [1.0, 0.5])
    poincare_N: list = field(default_factory=lambda: [4, 6, 8])
    poincare_point: float = math.pi / 2

    def grid_params(self):
        from .bgrid import GridParams
        return GridParams(self.Q, self.cheb, self.rho_s0, self.rho_N, self.fit_degree,
                          self.panels, self.panel_nodes)


@dataclass
class CohomologyConfig:
    table: list = field(default_factory=list)            # [(g, t, k)]
    abelian_ks: list = field(default_factory=lambda: [1, 3])
    presentations: dict = field(default_factory=dict)    # (g, t) -> tuple of MoebiusMap
    random_cases: list = field(default_factory=list)     # [(g, t)]
    random_ks: list = field(default_factory=lambda: [1, 3, 5])
    random_draws: int = 20
    seed: int = 0


@dataclass
class OutputConfig:
    directory: str = "out"
    formats: str = "both"


@dataclass
class RunConfig:
    name: str
    group: GroupConfig
    spectral: SpectralConfig
    cohomology: CohomologyConfig
    output: OutputConfig
    source: str = ""


# -- field readers --------------------------------------------------------------


def _section(doc, key, path):
    val = doc.get(key, {})
    if val is None:
        return {}
    if not isinstance(val, dict):
        raise ConfigError("expected a mapping", f"{path}.{key}" if path else key)
    return val


def _unknown(d, allowed, path):
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise ConfigError(f"unknown field(s) {', '.join(map(str, extra))}", path)


def _int(d, key, default, path, lo=None, hi=None):
    p = f"{path}.{key}"
    val = d.get(key, default)
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(f"expected an integer, got {val!r}", p)
    if lo is not None and val < lo:
        raise ConfigError(f"must be >= {lo}", p)
    if hi is not None and val > hi:
        raise ConfigError(f"exceeds cap {hi}", p)
    return val


def _real(val, path):
    x = parse_scalar(val, path)
    x = float(x)
    if not math.isfinite(x):
        raise ConfigError("must be finite", path)
    return x


def parse_lambda(val, path):
    """A spectral parameter from a number, ``"a+bj"`` string, ``"p/q"`` or ``[re, im]``."""
    if isinstance(val, (list, tuple)):
        if len(val) != 2:
            raise ConfigError("expected [re, im]", path)
        return complex(_real(val[0], f"{path}[0]"), _real(val[1], f"{path}[1]"))
    if isinstance(val, str) and ("j" in val or "i" in val):
        try:
            return complex(val.replace(" ", "").replace("i", "j"))
        except ValueError:
            raise ConfigError(f"not a complex literal: {val!r}", path) from None
    return complex(_real(val, path), 0.0)


def check_pole_margin(lam, path, margin=POLE_MARGIN):
    """Reject spectral parameters within ``margin`` of an integer (poles of both J and J at -lambda)."""
    dist = abs(lam - round(lam.real))
    if dist < margin:
        raise ConfigError(f"lambda={lam} lies within {margin} of the pole set", path)


def _pair(val, path, conv=float):
    if not isinstance(val, (list, tuple)) or len(val) != 2:
        raise ConfigError("expected a two-element list", path)
    return tuple(conv(v, f"{path}[{i}]") for i, v in enumerate(val))


def _arc(val, path):
    if isinstance(val, dict):
        _unknown(val, ("center", "halfwidth"), path)
        if "center" not in val or "halfwidth" not in val:
            raise ConfigError("arc needs center and halfwidth", path)
        c, w = _real(val["center"], f"{path}.center"), _real(val["halfwidth"], f"{path}.halfwidth")
    else:
        c, w = _pair(val, path, _real)
    if not 0 < w < math.pi / 2:
        raise ConfigError("halfwidth must lie in (0, pi/2)", path)
    return c, w


def _matrix(val, path):
    if not isinstance(val, (list, tuple)):
        raise ConfigError("expected four matrix entries", path)
    return MoebiusMap.parse(val, path)


# -- sections -------------------------------------------------------------------


def _group(doc):
    path = "group"
    allowed = ("kind", "radius", "n", "pairs", "word_cap", "collar_margin")
    _unknown(doc, allowed, path)
    kind = doc.get("kind", "none")
    if kind not in ("symmetric", "arcs", "explicit", "none"):
        raise ConfigError(f"unknown kind {kind!r}", f"{path}.kind")
    g = GroupConfig(kind)
    g.word_cap = _int(doc, "word_cap", 200000, path, 1, 10_000_000)
    g.collar_margin = _real(doc.get("collar_margin", 0), f"{path}.collar_margin")
    if kind == "symmetric":
        g.radius = _real(doc.get("radius", 0.1), f"{path}.radius")
        g.n = _int(doc, "n", 2, path, 1, 16)
        if not 0 < g.radius < math.pi / (2 * g.n):
            raise ConfigError("radius must leave gaps between the arcs", f"{path}.radius")
    elif kind in ("arcs", "explicit"):
        pairs = doc.get("pairs")
        if not isinstance(pairs, list) or not pairs:
            raise ConfigError("expected a non-empty list", f"{path}.pairs")
        for i, item in enumerate(pairs):
            p = f"{path}.pairs[{i}]"
            if not isinstance(item, dict):
                raise ConfigError("expected a mapping", p)
            _unknown(item, ("minus", "plus", "matrix"), p)
            for key in ("minus", "plus"):
                if key not in item:
                    raise ConfigError(f"missing {key}", p)
            g.arcs.append((_arc(item["minus"], f"{p}.minus"), _arc(item["plus"], f"{p}.plus")))
            if kind == "explicit":
                if "matrix" not in item:
                    raise ConfigError("missing matrix", p)
                g.matrices.append(_matrix(item["matrix"], f"{p}.matrix"))
    return g


def _spectral(doc):
    path = "spectral"
    allowed = ("N", "Q", "cheb", "rho_s0", "rho_N", "fit_degree", "panels", "panel_nodes", "M", "NF",
               "K", "lambdas", "scan", "eisenstein", "modes", "limit_depths", "poincare")
    _unknown(doc, allowed, path)
    sp = SpectralConfig()
    for key in ("N", "Q", "cheb", "rho_N", "fit_degree", "panels", "panel_nodes", "M", "NF", "K"):
        setattr(sp, key, _int(doc, key, getattr(sp, key), path, 1, CAPS[key]))
    if sp.Q % 2:
        raise ConfigError("must be even", f"{path}.Q")
    if sp.M & (sp.M - 1):
        raise ConfigError("must be a power of two", f"{path}.M")
    sp.rho_s0 = _real(doc.get("rho_s0", sp.rho_s0), f"{path}.rho_s0")
    if "lambdas" in doc:
        vals = doc["lambdas"]
        if not isinstance(vals, list):
            raise ConfigError("expected a list", f"{path}.lambdas")
        sp.lambdas = [parse_lambda(v, f"{path}.lambdas[{i}]") for i, v in enumerate(vals)]
    for i, lam in enumerate(sp.lambdas):
        check_pole_margin(lam, f"{path}.lambdas[{i}]")
    scan = _section(doc, "scan", path)
    _unknown(scan, ("re", "im", "steps"), f"{path}.scan")
    if scan:
        sp.scan_re = _pair(scan.get("re", list(sp.scan_re)), f"{path}.scan.re", _real)
        sp.scan_im = _pair(scan.get("im", list(sp.scan_im)), f"{path}.scan.im", _real)
        steps = scan.get("steps", list(sp.scan_steps))
        sp.scan_steps = _pair(steps, f"{path}.scan.steps", lambda v, p: _int({"v": v}, "v", 1, p, 1, 400))
    _check_scan_grid(sp, f"{path}.scan")
    eis = _section(doc, "eisenstein", path)
    _unknown(eis, ("lambda", "points"), f"{path}.eisenstein")
    if "lambda" in eis:
        sp.eis_lambda = parse_lambda(eis["lambda"], f"{path}.eisenstein.lambda")
    check_pole_margin(sp.eis_lambda, f"{path}.eisenstein.lambda")
    if "points" in eis:
        pts = eis["points"]
        if not isinstance(pts, list) or not pts:
            raise ConfigError("expected a non-empty list of [r, alpha]", f"{path}.eisenstein.points")
        sp.eis_points = [_pair(v, f"{path}.eisenstein.points[{i}]", _real) for i, v in enumerate(pts)]
        for i, (r, _) in enumerate(sp.eis_points):
            if not 0 <= r < 1:
                raise ConfigError("radius must lie in [0, 1)", f"{path}.eisenstein.points[{i}]")
    if "modes" in doc:
        modes = doc["modes"]
        if not isinstance(modes, list) or not modes:
            raise ConfigError("expected a non-empty list of [k, a, b]", f"{path}.modes")
        sp.modes = []
        for i, m in enumerate(modes):
            p = f"{path}.modes[{i}]"
            if not isinstance(m, list) or len(m) != 3:
                raise ConfigError("expected [k, a, b]", p)
            k = _int({"k": m[0]}, "k", 0, p, 0, sp.Q // 2 - 1)
            sp.modes.append((k, _real(m[1], f"{p}[1]"), _real(m[2], f"{p}[2]")))
    if "limit_depths" in doc:
        ds = doc["limit_depths"]
        if not isinstance(ds, list) or not ds:
            raise ConfigError("expected a non-empty list", f"{path}.limit_depths")
        sp.limit_depths = [_int({"d": d}, "d", 1, f"{path}.limit_depths[{i}]", 0, 14) for i, d in enumerate(ds)]
    pc = _section(doc, "poincare", path)
    _unknown(pc, ("exponents", "N", "point"), f"{path}.poincare")
    if "exponents" in pc:
        sp.poincare_exponents = [_real(v, f"{path}.poincare.exponents[{i}]") for i, v in enumerate(pc["exponents"])]
    if "N" in pc:
        sp.poincare_N = [_int({"n": v}, "n", 1, f"{path}.poincare.N[{i}]", 0, CAPS["N"])
                         for i, v in enumerate(pc["N"])]
    if "point" in pc:
        sp.poincare_point = _real(pc["point"], f"{path}.poincare.point")
    return sp


def scan_grid(sp):
    import numpy as np
    re = np.linspace(sp.scan_re[0], sp.scan_re[1], sp.scan_steps[0])
    im = np.linspace(sp.scan_im[0], sp.scan_im[1], sp.scan_steps[1])
    return re, im


def _check_scan_grid(sp, path):
    re, im = scan_grid(sp)
    for x in re:
        for y in im:
            check_pole_margin(complex(x, y), path)


def _cohomology(doc):
    path = "cohomology"
    _unknown(doc, ("table", "abelian_ks", "presentations", "random", "seed"), path)
    c = CohomologyConfig()
    for i, row in enumerate(doc.get("table", []) or []):
        p = f"{path}.table[{i}]"
        if not isinstance(row, list) or len(row) != 3:
            raise ConfigError("expected [g, t, k]", p)
        g, t, k = (_int({"v": v}, "v", 0, f"{p}[{j}]", 0, 64) for j, v in enumerate(row))
        if k % 2 == 0:
            raise ConfigError("k must be odd", f"{p}[2]")
        c.table.append((g, t, k))
    if "abelian_ks" in doc:
        c.abelian_ks = [_int({"v": v}, "v", 1, f"{path}.abelian_ks[{i}]", 1, 63)
                        for i, v in enumerate(doc["abelian_ks"])]
    c.seed = _int(doc, "seed", 0, path, 0, (1 << 64) - 1)
    pres = _section(doc, "presentations", path)
    for key, mats in pres.items():
        p = f"{path}.presentations.{key}"
        try:
            g, t = (int(x) for x in str(key).split(","))
        except ValueError:
            raise ConfigError("key must be 'g,t'", p) from None
        if not isinstance(mats, list):
            raise ConfigError("expected a list of matrices", p)
        c.presentations[(g, t)] = tuple(_matrix(m, f"{p}[{i}]") for i, m in enumerate(mats))
    rnd = _section(doc, "random", path)
    _unknown(rnd, ("cases", "ks", "draws"), f"{path}.random")
    c.random_cases = [_pair(v, f"{path}.random.cases[{i}]", lambda x, q: _int({"v": x}, "v", 0, q, 0, 8))
                      for i, v in enumerate(rnd.get("cases", []) or [])]
    if "ks" in rnd:
        c.random_ks = [_int({"v": v}, "v", 1, f"{path}.random.ks[{i}]", 1, 63) for i, v in enumerate(rnd["ks"])]
    c.random_draws = _int(rnd, "draws", 20, f"{path}.random", 0, 10000)
    return c


def _output(doc):
    path = "output"
    _unknown(doc, ("directory", "formats"), path)
    o = OutputConfig()
    o.directory = str(doc.get("directory", o.directory))
    o.formats = doc.get("formats", o.formats)
    if o.formats not in ("csv", "json", "both"):
        raise ConfigError(f"unknown format {o.formats!r}", f"{path}.formats")
    return o


# -- entry points -----------------------------------------------------------------


def parse_config(doc, name="<inline>"):
    if not isinstance(doc, dict):
        raise ConfigError("top level must be a mapping", "<root>")
    _unknown(doc, ("name", "schema_version", "group", "spectral", "cohomology", "output"), "<root>")
    version = doc.get("schema_version", 1)
    if version != 1:
        raise ConfigError(f"unsupported schema_version {version!r}", "schema_version")
    try:
        return RunConfig(
            name=str(doc.get("name", name)),
            group=_group(_section(doc, "group", "")),
            spectral=_spectral(_section(doc, "spectral", "")),
            cohomology=_cohomology(_section(doc, "cohomology", "")),
            output=_output(_section(doc, "output", "")),
            source=name,
        )
    except ConfigError:
        raise
    except HyperscatterError as exc:
        raise ConfigError(str(exc), "<root>") from None


def bundled_text(name):
    if name not in BUNDLED:
        raise ConfigError(f"no bundled config named {name!r}", "--config")
    return resources.files("hyperscatter").joinpath("configs").joinpath(f"{name}.yaml").read_text(encoding="utf-8")


def load_config(source):
    """Load a config from a file path or the name of a bundled config."""
    if str(source) in BUNDLED and not Path(source).exists():
        text, name = bundled_text(str(source)), str(source)
    else:
        try:
            text, name = Path(source).read_text(encoding="utf-8"), str(source)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc.strerror}", "--config") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}" if mark else "<root>"
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}", where) from None
    return parse_config(doc or {}, name)
