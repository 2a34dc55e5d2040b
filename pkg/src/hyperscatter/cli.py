"""Command-line entry point.

    hyperscatter <subcommand> --config thin-schottky --out DIR [--format csv|json|both]

Every subcommand writes its tables plus ``report.json`` (status, metrics and a
file manifest). Exit codes: 0 success, 2 config error, 3 task failure,
4 acceptance failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import load_config, scan_grid
from .emit import emit, relpaths, write_json
from .errors import ConfigError, HyperscatterError, InternalInconsistency, TaskError

EXIT_OK, EXIT_CONFIG, EXIT_TASK, EXIT_ACCEPT = 0, 2, 3, 4
SUBCOMMANDS = ("validate", "limit-set", "exponent", "poincare", "scatter", "resonances",
               "eisenstein", "cohomology", "check-all")


class Run:
    """Output bookkeeping for one subcommand invocation."""

    def __init__(self, cfg, out, fmt, command, seed=None, threads=1):
        self.cfg = cfg
        self.out = Path(out)
        self.fmt = fmt
        self.command = command
        self.files = []
        self.tasks = {}
        self.metrics = {}
        self.settings = {"seed": seed, "threads": threads}

    def table(self, stem, header, rows, **extra):
        self.files += emit({"header": header, "rows": rows, **extra}, self.out / stem, self.fmt)

    def task(self, name, status, **metrics):
        self.tasks[name] = status
        if metrics:
            self.metrics[name] = metrics

    def report(self):
        path = self.out / "report.json"
        manifest = relpaths(self.files, self.out)
        doc = {"subcommand": self.command, "config": self.cfg.name, "version": __version__,
               "settings": self.settings, "status": self.tasks, "metrics": self.metrics,
               "files": manifest}
        write_json(path, doc)
        missing = [f for f in manifest if not (self.out / f).exists()]
        if missing:
            raise TaskError(f"manifest lists missing files {missing}", "cli.report")
        return path


def _group(cfg):
    if cfg.group.kind == "none":
        raise TaskError("this subcommand needs a Schottky group in the config", "cli.group")
    return cfg.group.build()


def _scattering(cfg):
    from .scattering import Scattering
    return Scattering(_group(cfg), cfg.spectral.grid_params(), cfg.spectral.N)


# -- subcommands --------------------------------------------------------------------


def cmd_validate(run):
    cfg = run.cfg
    if cfg.group.kind != "none":
        s = _group(cfg)
        diag = s.validate()
        rows = [(i, g) for i, g in enumerate(diag["gaps"])]
        run.table("validate_gaps", ["index", "gap"], rows)
        rows = [(a, r) for a, r in zip(s.letters, diag["contraction"])]
        run.table("validate_contraction", ["letter", "max_derivative"], rows)
        run.task("group", "ok", min_gap=diag["min_gap"], paired_exactly=diag["paired_exactly"],
                 generators=s.n)
    from .cohomology import SurfaceGroupPresentation
    for (g, t), mats in sorted(cfg.cohomology.presentations.items()):
        SurfaceGroupPresentation(g, t, mats)
        run.task(f"presentation {g},{t}", "ok")
    return EXIT_OK


def cmd_limit_set(run):
    from .schottky import limit_cover
    s = _group(run.cfg)
    rows, summary = [], []
    for d in run.cfg.spectral.limit_depths:
        cover = limit_cover(s, d)
        rows += cover.rows()
        summary.append((d, len(cover.arcs), cover.total_length))
    run.table("limit_cover", ["depth", "arc_start", "arc_end"], rows)
    run.table("limit_cover_summary", ["depth", "arcs", "total_length"], summary)
    run.task("limit-set", "ok", depths=list(run.cfg.spectral.limit_depths))
    return EXIT_OK


def cmd_exponent(run):
    from .schottky import bisection_dimension, critical_exponent, dimension_at_depth
    s = _group(run.cfg)
    dim, delta = critical_exponent(s)
    bis = bisection_dimension(s)
    depth_rows = [(d, dimension_at_depth(s, d)) for d in range(2, 9)]
    run.table("exponent_depths", ["depth", "dimension"], depth_rows)
    run.table("exponent", ["method", "dimension", "critical_exponent"],
              [("transfer", dim, delta), ("bisection", bis, bis - 0.5)])
    run.task("exponent", "ok", dimension=dim, critical_exponent=delta, bisection=bis)
    return EXIT_OK


def cmd_poincare(run):
    from .schottky import poincare_partial
    sp = run.cfg.spectral
    s = _group(run.cfg)
    rows = []
    for x in sp.poincare_exponents:
        for N in sp.poincare_N:
            rows.append((x, N, float(np.real(poincare_partial(s, x, sp.poincare_point, N)))))
    run.table("poincare", ["exponent", "N", "partial_sum"], rows, point=sp.poincare_point)
    run.task("poincare", "ok", point=sp.poincare_point)
    return EXIT_OK


def cmd_scatter(run):
    from .errors import NearSingular
    from .scattering import continue_s
    sc = _scattering(run.cfg)
    rows, failed = [], 0
    for i, lam in enumerate(run.cfg.spectral.lambdas):
        try:
            op = continue_s(sc, lam) if lam.real < 0 else sc.operator(lam)
        except NearSingular as exc:
            rows.append((i, lam.real, lam.imag, exc.sigma_min, float("nan"), float("nan"), "near-singular"))
            failed += 1
            continue
        sv = np.linalg.svd(op.matrix, compute_uv=False)
        stem = run.out / f"scatter_{i}"
        run.out.mkdir(parents=True, exist_ok=True)
        op.export(str(stem))
        run.files += [Path(f"{stem}_real.csv"), Path(f"{stem}_imag.csv"), Path(f"{stem}_meta.json")]
        rows.append((i, lam.real, lam.imag, sv[-1], sv[0] / sv[-1], sv[0], "ok"))
    run.table("scatter", ["index", "re_lambda", "im_lambda", "sigma_min", "cond", "norm", "status"], rows)
    run.task("scatter", "ok" if not failed else "partial", operators=len(rows) - failed, nodes=sc.grid.size)
    return EXIT_OK if not failed else EXIT_TASK


def cmd_resonances(run):
    from .scattering import resonance_scan
    sp = run.cfg.spectral
    sc = _scattering(run.cfg)
    re, im = scan_grid(sp)
    res = resonance_scan(sc, (re[0], re[-1]), (im[0], im[-1]), sp.scan_steps)
    run.table("resonances", ["re_lambda", "im_lambda", "sigma_min", "log_abs_det", "cond"], res.rows())
    k = int(np.nanargmin(res.sigma_min))
    best = res.lambdas.ravel()[k]
    run.task("resonances", "ok", points=int(res.lambdas.size), min_sigma=float(res.sigma_min.ravel()[k]),
             argmin=[best.real, best.imag])
    return EXIT_OK


def cmd_eisenstein(run):
    from .boundary import InteriorPoint
    from .scattering import Eisenstein
    sp = run.cfg.spectral
    sc = _scattering(run.cfg)
    s = sc.s
    phi = sc.grid.trig_function(sp.modes)
    E = Eisenstein(sc, phi, sp.eis_lambda)
    rows = []
    for r, a in sp.eis_points:
        p = InteriorPoint.disc(r, a)
        e = E(p)
        defect = max(abs(E(InteriorPoint(p.chart, s.letter_map(b).act_disc(p.value))) - e)
                     for b in s.letters) / abs(e)
        rows.append((r, a, e.real, e.imag, defect))
    run.table("eisenstein", ["r", "alpha", "re_value", "im_value", "invariance_defect"], rows,
              **{"lambda": sp.eis_lambda})
    run.task("eisenstein", "ok", max_invariance_defect=max(r[-1] for r in rows))
    return EXIT_OK


def cmd_cohomology(run):
    from .cohomology import (SurfaceGroupPresentation, default_rng, fk_h_dims, limit_cohomology_dims,
                             q_rank, random_presentation)
    c = run.cfg.cohomology
    rng = default_rng(c.seed)
    table = list(c.table) + [(0, 2, k) for k in c.abelian_ks]
    rows, failed = [], []
    for g, t, k in table:
        mats = c.presentations.get((g, t))
        pres = SurfaceGroupPresentation(g, t, mats) if mats is not None else random_presentation(g, t, rng)
        q = q_rank(pres, k)
        try:
            h0, h1 = limit_cohomology_dims(pres, k)
            status = "ok"
        except InternalInconsistency as exc:
            h0 = h1 = None
            status = "inconsistent"
            failed.append(str(exc))
        rows.append((g, t, k, h0, h1, q, t - q, status))
    run.table("cohomology", ["g", "t", "k", "h0", "h1", "q", "t_minus_q", "status"], rows)
    fk = []
    for g, t, k in table:
        mats = c.presentations.get((g, t))
        if mats is not None:
            fk.append((g, t, k) + fk_h_dims(SurfaceGroupPresentation(g, t, mats), k))
    if fk:
        run.table("cohomology_fk", ["g", "t", "k", "h0", "h1"], fk)
    run.task("cohomology", "ok" if not failed else "partial", failures=failed)
    return EXIT_OK if not failed else EXIT_TASK


def cmd_check_all(run, echo=print):
    from .acceptance import run_all
    return emit_checks(run, run_all(run.cfg, echo=echo))


def emit_checks(run, results):
    """Write the acceptance table and per-criterion status for already computed results."""
    rows = [(r.number, r.title, r.passed, r.detail) for r in results]
    run.table("check_all", ["criterion", "title", "passed", "detail"], rows,
              results=[r.record() for r in results])
    for r in results:
        run.task(f"criterion {r.number}", "pass" if r.passed else "fail")
    return EXIT_OK if all(r.passed for r in results) else EXIT_ACCEPT


COMMANDS = {"validate": cmd_validate, "limit-set": cmd_limit_set, "exponent": cmd_exponent,
            "poincare": cmd_poincare, "scatter": cmd_scatter, "resonances": cmd_resonances,
            "eisenstein": cmd_eisenstein, "cohomology": cmd_cohomology, "check-all": cmd_check_all}


# -- driver ---------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="hyperscatter", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default="thin-schottky",
                       help="config file, or a bundled name: thin-schottky, cohomology-table")
        p.add_argument("--out", default=None, help="output directory (default: from config)")
        p.add_argument("--threads", type=int, default=1, help="thread budget recorded in the report")
        p.add_argument("--seed", type=int, default=None, help="seed for random presentations")
        p.add_argument("--format", choices=("csv", "json", "both"), default=None)
    return ap


def run(cfg, command, out=None, fmt=None, seed=None, threads=1, echo=print):
    """Run one subcommand; returns ``(exit_code, report_path)``."""
    if seed is not None:
        if not 0 <= seed < 1 << 64:
            raise ConfigError("seed must be an unsigned 64-bit integer", "--seed")
        cfg.cohomology.seed = seed
    if threads < 1:
        raise ConfigError("must be >= 1", "--threads")
    r = Run(cfg, out or cfg.output.directory, fmt or cfg.output.formats, command, seed, threads)
    fn = COMMANDS[command]
    try:
        code = fn(r, echo) if command == "check-all" else fn(r)
    except ConfigError:
        raise
    except HyperscatterError as exc:
        r.task(command, "error", message=str(exc))
        r.report()
        raise TaskError(str(exc), f"cli.{command}") from exc
    return code, r.report()


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        code, report = run(cfg, args.command, args.out, args.format, args.seed, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TaskError as exc:
        print(f"task failed: {exc}", file=sys.stderr)
        return EXIT_TASK
    print(f"{args.command}: exit {code}, report {report}")
    return code


if __name__ == "__main__":
    sys.exit(main())
