"""
Command line entry point.

Settings are resolved as built-in defaults, then the ``--config`` JSON
file, then explicit flags.  Every run writes ``manifest.json`` next to its
outputs with the resolved configuration, its hash and the hash of every
file produced.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

from . import __version__
from .emcore import DesignError
from .experiments import (DEFAULT_FREQUENCY, DesignFileError,
                          ExcitationFileError, compare_configs, design_to_dict,
                          evaluate_design, load_design, read_excitation_file,
                          write_fig3, write_fig4, write_fig5, write_history,
                          write_table1, write_table3)
from .optimizer import DEConfig, default_workers, optimize_array, \
    sweep_max_elements

log = logging.getLogger("superdirective")

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 2, 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DESettings:
    population_size: int = 200
    crossover: float = 0.8
    mutation: float = 0.8
    max_iterations: int = 250
    seed: int = 0


@dataclass(frozen=True)
class RunConfig:
    frequency: float = DEFAULT_FREQUENCY
    z0: float = 50.0
    de: DESettings = field(default_factory=DESettings)
    n_range: tuple[int, int] = (2, 10)
    output_dir: str = "results"
    pattern_step: float = 0.5

    def __post_init__(self):
        for name in ("frequency", "z0", "pattern_step"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or v <= 0:
                raise ConfigError(f"'{name}' must be a positive number")
        lo, hi = self.n_range
        if not (isinstance(lo, int) and isinstance(hi, int)
                and 1 <= lo <= hi <= 16):
            raise ConfigError("'n_range' must satisfy 1 <= min <= max <= 16")
        try:
            self.de_config()
        except ValueError as exc:
            raise ConfigError(f"de: {exc}") from None

    def de_config(self) -> DEConfig:
        return DEConfig(**asdict(self.de))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_range"] = list(self.n_range)
        return d

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        if not isinstance(doc, dict):
            raise ConfigError("configuration must be a JSON object")
        _reject_unknown(doc, cls, "config")
        doc = dict(doc)
        if "de" in doc:
            if not isinstance(doc["de"], dict):
                raise ConfigError("'de' must be an object")
            _reject_unknown(doc["de"], DESettings, "de")
            de = DESettings(**doc["de"])
            for f in fields(DESettings):
                v = getattr(de, f.name)
                if f.type == "int" and (isinstance(v, bool)
                                        or not isinstance(v, int)):
                    raise ConfigError(f"de.{f.name} must be an integer")
            doc["de"] = de
        if "n_range" in doc:
            nr = doc["n_range"]
            if not (isinstance(nr, list) and len(nr) == 2):
                raise ConfigError("'n_range' must be [min, max]")
            doc["n_range"] = tuple(nr)
        return cls(**doc)

    def sha256(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def _reject_unknown(doc, cls, where):
    known = {f.name for f in fields(cls)}
    extra = sorted(set(doc) - known)
    if extra:
        raise ConfigError(f"{where}: unknown key(s) {extra}")


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return RunConfig.from_dict(doc)


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.freq_ghz is not None:
        cfg = replace(cfg, frequency=args.freq_ghz * 1e9)
    if args.seed is not None:
        cfg = replace(cfg, de=replace(cfg.de, seed=args.seed))
    if args.out is not None:
        cfg = replace(cfg, output_dir=str(args.out))
    return cfg


def _sha(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out: Path, command: str, cfg: RunConfig, outputs, extra=None):
    doc = {
        "command": command,
        "package_version": __version__,
        "config": cfg.to_dict(),
        "config_sha256": cfg.sha256(),
        "seed": cfg.de.seed,
        "outputs": {p.name: _sha(p) for p in sorted(outputs)},
    }
    if extra:
        doc.update(extra)
    (out / "manifest.json").write_text(json.dumps(doc, indent=2) + "\n")


def _dump(path: Path, doc):
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path


def cmd_evaluate(args, cfg: RunConfig) -> int:
    if args.design:
        design = load_design(args.design)
    else:
        ref = resources.files("superdirective") / "data" / "table2.json"
        with resources.as_file(ref) as p:
            design = load_design(p)
    if args.freq_ghz is not None:
        design = replace(design, frequency=cfg.frequency)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = evaluate_design(design, cfg.pattern_step, cfg.z0)
    summary = report.summary()
    files = [_dump(out / "report.json", summary), out / "fig5.csv"]
    write_fig5(out / "fig5.csv", report.cut)
    write_manifest(out, "evaluate", cfg, files)
    print(f"end-fire realized gain {summary['endfire_realized_gain_db']:.2f} dBi, "
          f"total efficiency {summary['total_efficiency_pct']:.2f} %")
    return EXIT_OK


def cmd_optimize(args, cfg: RunConfig) -> int:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    n = args.n
    if not 1 <= n <= 16:
        raise ConfigError("--n must lie in [1, 16]")
    r = optimize_array(n, cfg.de_config(), cfg.frequency, cfg.z0,
                       workers=default_workers())
    hist, fig3 = out / f"history_N{n}.csv", out / f"fig3_N{n}.csv"
    write_history(hist, r.run, r.rg_history)
    write_fig3(fig3, r.run)
    best = _dump(out / f"best_design_N{n}.json", design_to_dict(r.design))
    write_manifest(out, "optimize", cfg, [hist, fig3, best], {"n": n})
    print(f"N={n}: target {r.target_db:.3f} dBi, achieved "
          f"{r.realized_gain_db:.3f} dBi, cost {r.run.best_cost:.3g} after "
          f"{r.run.iterations} iterations")
    return EXIT_OK


def cmd_sweep(args, cfg: RunConfig) -> int:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    lo, hi = cfg.n_range

    def progress(r):
        log.info("N=%d target %.3f achieved %.3f cost %.3g", r.n, r.target_db,
                 r.realized_gain_db, r.run.best_cost)

    sweep = sweep_max_elements(range(lo, hi + 1), cfg.de_config(),
                               cfg.frequency, cfg.z0,
                               workers=default_workers(), progress=progress)
    files = []
    for n, r in sweep.runs.items():
        write_fig3(out / f"fig3_N{n}.csv", r.run)
        files.append(out / f"fig3_N{n}.csv")
    write_fig4(out / "fig4.csv", sweep)
    write_table1(out / "table1.csv", sweep, range(lo, hi + 1))
    files += [out / "fig4.csv", out / "table1.csv"]
    write_manifest(out, "sweep", cfg, files,
                   {"max_elements_achieved": sweep.max_elements})
    print(f"largest N meeting the target: {sweep.max_elements}")
    return EXIT_OK


def cmd_compare(args, cfg: RunConfig) -> int:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.design:
        design = load_design(args.design)
    else:
        from .experiments import paper_design
        design = paper_design(cfg.frequency)
    lit = None
    if args.excitations:
        lit = read_excitation_file(args.excitations)
    else:
        print("notice: no excitation file given; the theoretical_excitation "
              "row is omitted", file=sys.stderr)
    rows = compare_configs(design, lit, cfg.z0)
    write_table3(out / "table3.csv", rows)
    write_manifest(out, "compare", cfg, [out / "table3.csv"])
    opt = next(r for r in rows if r.label == "optimized")
    for r in rows:
        ratio = 10 ** ((opt.realized_gain - r.realized_gain) / 10)
        print(f"{r.label:24s} {r.realized_gain:7.2f} dBi "
              f"{100 * r.total_efficiency:6.2f} %   optimized vs row: "
              f"{opt.realized_gain - r.realized_gain:+.2f} dB, "
              f"{100 * (ratio - 1):+.2f} % linear")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="DE seed (overrides config)")
    common.add_argument("--out", help="output directory (overrides config)")
    common.add_argument("--freq-ghz", type=float,
                        help="operating frequency in GHz (overrides config)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(
        prog="superdirective",
        description="Super-directive dipole array modelling and synthesis")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    ev = sub.add_parser("evaluate", parents=[common],
                        help="pattern and scalar report for a design file")
    ev.add_argument("design", nargs="?",
                    help="JSON design (default: bundled table2.json)")
    op = sub.add_parser("optimize", parents=[common],
                        help="DE synthesis for one element count")
    op.add_argument("--n", type=int, required=True)
    sub.add_parser("sweep", parents=[common],
                   help="DE synthesis over the configured N range")
    cp = sub.add_parser("compare", parents=[common],
                        help="comparison table against reference arrays")
    cp.add_argument("--design", help="JSON design (default: built-in)")
    cp.add_argument("--excitations",
                    help="text file of 'amplitude phase_deg' lines")
    return p


COMMANDS = {"evaluate": cmd_evaluate, "optimize": cmd_optimize,
            "sweep": cmd_sweep, "compare": cmd_compare}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, DesignFileError, ExcitationFileError,
            DesignError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc.filename or ''}: {exc.strerror or exc}",
              file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        log.debug("unhandled", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
