"""Command-line front end.

    detnorm generate   --group Z --gen thue-morse --horizon 16
    detnorm normality  --gen prng --seed 0 --set evens --mode orbit --n 1000000
    detnorm complexity --gen thue-morse --catalog intervals:32 --n 1000000
    detnorm experiment --gen prng --seed 0 --set squarefree --n 1000000

Exit codes: 0 pass, 1 usage or configuration error, 2 test failure.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np

from . import analysis as an
from . import generators as gen
from . import group_core as gc
from .symbolic import SymbolicFunction, constant, indicator, periodic, write_stream

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    group: Optional[str] = None
    gen: Optional[str] = None
    seed: Optional[int] = None
    folner: Optional[str] = None
    n: Optional[int] = None
    horizon: Optional[int] = None
    set: Optional[str] = None
    mode: Optional[str] = None
    catalog: Optional[str] = None
    eps: Optional[float] = None
    tol: Optional[float] = None
    out: Optional[str] = None
    format: Optional[str] = None
    workers: int = 1

    def echo(self) -> dict:
        # worker count does not change results, so it is left out of the echo
        d = asdict(self)
        d.pop("workers")
        return d


_INT = {"seed", "n", "horizon", "workers"}
_FLOAT = {"eps", "tol"}
_KEYS = {f.name for f in fields(RunConfig)} - {"command"}
MODES = ("simple", "orbit", "block", "classical")
FORMATS = ("json", "csv", "raw", "text")


# --------------------------------------------------------------------------
# config files


def read_config(path: str) -> dict:
    """key = value lines; '#' comments and [section] headers are ignored."""
    out = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line or (line.startswith("[") and line.endswith("]")):
                continue
            key, eq, value = line.partition("=")
            if not eq:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key = key.strip().replace("-", "_")
            value = value.strip()
            if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
                value = value[1:-1]
            if key not in _KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = value
    return out


def _coerce(key: str, value):
    if value is None:
        return None
    try:
        if key in _INT:
            return int(value)
        if key in _FLOAT:
            return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"--{key}: not a number: {value!r}") from None
    return str(value)


# --------------------------------------------------------------------------
# specs


def _split_spec(spec: str) -> tuple[str, dict]:
    name, _, rest = spec.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            k, eq, v = item.partition("=")
            if not eq:
                raise ConfigError(f"bad parameter {item!r} in {spec!r} (expected key=value)")
            params[k.strip()] = v.strip()
    return name.strip(), params


def build_group(cfg: RunConfig) -> gc.GroupContext:
    name = cfg.group or "N"
    try:
        return gc.get_group(name)
    except KeyError:
        raise ConfigError(f"unknown group {name!r}; choose from {sorted(gc.GROUPS)}") from None


def build_generator(cfg: RunConfig, group: gc.GroupContext) -> SymbolicFunction:
    if not cfg.gen:
        raise ConfigError("--gen is required")
    name, p = _split_spec(cfg.gen)
    try:
        if name == "prng":
            if cfg.seed is None:
                raise ConfigError("generator 'prng' needs --seed")
            s = int(p.get("s", 2))
            return gen.prng_uniform(cfg.seed, group, tuple(range(s)))
        if name == "thue-morse":
            _need(group, ("N", "Z"), name)
            return gen.thue_morse(group)
        if name == "mult-thue-morse":
            _need(group, ("Nmul",), name)
            return gen.mult_thue_morse()
        if name == "balanced-parity":
            _need(group, ("Z",), name)
            return gen.balanced_parity()
        if name == "vh-automatic":
            if "digits" not in p or "automaton" not in p:
                raise ConfigError("vh-automatic needs digits=<file>,automaton=<file>")
            ds = gen.load_digit_system(p["digits"])
            return gen.vh_automatic(gen.load_automaton(p["automaton"], ds.group), ds)
        if name == "periodic":
            _need(group, ("N", "Z"), name)
            pattern = [int(c) for c in p.get("pattern", "01")]
            return periodic(group, pattern)
        if name == "constant":
            return constant(group, int(p.get("symbol", 0)))
        if name == "indicator":
            if "set" not in p:
                raise ConfigError("indicator needs set=<set spec>")
            return indicator(build_set(p["set"].replace(";", ","), group, None, cfg), group)
    except (ValueError, OSError, gen.DigitSystemError) as e:
        raise ConfigError(f"bad generator {cfg.gen!r}: {e}") from None
    raise ConfigError(f"unknown generator {name!r}")


def _need(group, names, what):
    if group.name not in names:
        raise ConfigError(f"generator {what!r} needs group {' or '.join(names)}, not {group.name}")


def build_set(spec: Optional[str], group: gc.GroupContext, y: Optional[SymbolicFunction],
              cfg: RunConfig) -> gc.SubsetPredicate:
    if not spec:
        raise ConfigError("--set is required")
    name, _, arg = spec.partition(":")
    try:
        if name in ("all", "G"):
            return gc.everything()
        if name == "evens":
            return gc.residue_class(0, 2)
        if name == "odds":
            return gc.residue_class(1, 2)
        if name == "residue":
            r, m = arg.split("/") if "/" in arg else arg.split(":")
            return gc.residue_class(int(r), int(m))
        if name == "squarefree":
            hi = (cfg.horizon or cfg.n or 10 ** 6) + 64
            return gen.squarefree_indicator(hi)
        if name == "bfree":
            return gen.bfree_indicator([int(b) for b in arg.split(",")])
        if name == "kfree":
            return gen.lattice_kfree_indicator(group.dim, int(arg or 2))
        if name == "squares":
            return gc.SubsetPredicate(lambda n: n >= 0 and int(np.sqrt(n)) ** 2 == n, "squares",
                                      mask=lambda a: np.isin(a, np.arange(int(np.sqrt(max(a.max(initial=0), 0))) + 2) ** 2))
        if name == "factorial-intervals":
            return gc.factorial_intervals()
        if name == "incr":
            return gen.perm_incr_indicator(int(arg or 2))
        if name == "level":
            if y is None:
                raise ConfigError("set 'level' needs a generator")
            sym = int(arg) if arg else y.alphabet[-1]
            if sym not in y.alphabet:
                raise ConfigError(f"symbol {sym} not in the alphabet")
            return an.level_set(y, sym)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad set {spec!r}: {e}") from None
    raise ConfigError(f"unknown set {name!r}")


FOLNERS = {
    "intervals": gc.standard_intervals,
    "initial": gc.initial_intervals,
    "centered": gc.centered_intervals,
    "factorial": gc.factorial_folner,
    "cubes": gc.centered_cubes,
    "symmetric": gc.symmetric_groups,
    "exponent-boxes": gc.exponent_boxes,
}

_DEFAULT_FOLNER = {"N": "intervals", "Z": "intervals", "Nmul": "exponent-boxes", "Perm": "symmetric"}


def build_folner(cfg: RunConfig, group: gc.GroupContext) -> gc.FolnerSequence:
    name = cfg.folner or _DEFAULT_FOLNER.get(group.name, "cubes")
    if name not in FOLNERS:
        raise ConfigError(f"unknown Følner sequence {name!r}; choose from {sorted(FOLNERS)}")
    try:
        return FOLNERS[name](group)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Følner sequence {name!r} does not fit group {group.name}: {e}") from None


def build_catalog(spec: Optional[str], group: gc.GroupContext, default: str) -> list:
    spec = spec or default
    name, _, arg = spec.partition(":")
    try:
        m = int(arg) if arg else 1
    except ValueError:
        raise ConfigError(f"bad catalog {spec!r}") from None
    if m < 1:
        raise ConfigError("catalog size must be >= 1")
    if name == "intervals":
        if not group.vector:
            raise ConfigError("interval catalog needs a 1-d group")
        return an.interval_domains(group, m)
    if name == "cubes":
        return an.cube_domains(group, m)
    if name == "identity":
        return [gc.FiniteSet(group, [group.identity])]
    if name == "symmetric":
        if group.name != "Perm":
            raise ConfigError("symmetric catalog needs group Perm")
        return [gc.FiniteSet(group, gc.symmetric_group(k)) for k in range(1, m + 1)]
    raise ConfigError(f"unknown catalog {name!r}")


def _window_index(cfg: RunConfig) -> int:
    n = cfg.n if cfg.n is not None else cfg.horizon
    if n is None:
        raise ConfigError("--n (or --horizon) is required")
    if n < 1:
        raise ConfigError("--n must be >= 1")
    return n


# --------------------------------------------------------------------------
# commands


def cmd_generate(cfg: RunConfig) -> tuple[bytes, int]:
    group = build_group(cfg)
    y = build_generator(cfg, group)
    h = cfg.horizon or cfg.n
    if not h or h < 1:
        raise ConfigError("--horizon is required")
    if group.vector:
        elements = np.arange(h, dtype=np.int64)
    elif group.name == "Nmul":
        elements = [gc.factor_exponents(N) for N in range(1, h + 1)]
    else:
        elements = [group.enumerate(i) for i in range(h)]
    vals = y.values(elements)
    fmt = cfg.format or "text"
    if fmt == "raw":
        buf = io.BytesIO()
        write_stream(buf, vals, y.alphabet_size)
        return buf.getvalue(), EXIT_OK
    syms = [y.alphabet[int(v)] for v in vals]
    if fmt == "text":
        sep = "" if all(len(str(s)) == 1 for s in syms) else ","
        return (sep.join(str(s) for s in syms) + "\n").encode(), EXIT_OK
    labels = ([str(N) for N in range(1, h + 1)] if group.name == "Nmul"
              else [group.format(g if not isinstance(g, np.integer) else int(g)) for g in elements])
    if fmt == "csv":
        lines = ["element,symbol"] + [f"\"{e}\",{s}" for e, s in zip(labels, syms)]
        return ("\n".join(lines) + "\n").encode(), EXIT_OK
    doc = {"generator": y.name, "group": group.name, "elements": labels, "symbols": syms}
    return (json.dumps(doc, indent=2) + "\n").encode(), EXIT_OK


def cmd_normality(cfg: RunConfig) -> tuple[bytes, int]:
    if not cfg.set:
        raise ConfigError("--set is required")
    group = build_group(cfg)
    y = build_generator(cfg, group)
    A = build_set(cfg.set, group, y, cfg)
    folner = build_folner(cfg, group)
    mode = cfg.mode or "orbit"
    if mode not in MODES:
        raise ConfigError(f"--mode must be one of {MODES}")
    n = _window_index(cfg)
    catalog = build_catalog(cfg.catalog, group, "intervals:6" if group.vector else "identity")
    if mode == "classical":
        if group.name not in ("N", "Z"):
            raise ConfigError("classical mode needs group N or Z")
        horizon = cfg.horizon or folner.interval(n)[1]
        report = an.classical_normality_along(y, A, max(len(K) for K in catalog), horizon, cfg.tol, cfg.workers)
    else:
        report = an.normality(mode, y, A, folner, n, catalog, cfg.tol, cfg.workers)
    _only(cfg, ("json",))
    return (report.to_json() + "\n").encode(), EXIT_OK if report.verdict else EXIT_FAIL


def cmd_complexity(cfg: RunConfig) -> tuple[bytes, int]:
    group = build_group(cfg)
    x = build_generator(cfg, group)
    folner = build_folner(cfg, group)
    n = _window_index(cfg)
    domains = build_catalog(cfg.catalog, group, "intervals:16" if group.vector else "cubes:3")
    if cfg.eps is not None and not 0 <= cfg.eps < 1:
        raise ConfigError("--eps must lie in [0, 1)")
    prof = an.rate_profile(x, domains, folner.at(n), cfg.eps, cfg.workers)
    fmt = cfg.format or "csv"
    _only(cfg, ("csv", "json"))
    if fmt == "csv":
        return prof.to_csv().encode(), EXIT_OK
    return (json.dumps(prof.as_dict(), indent=2) + "\n").encode(), EXIT_OK


def cmd_experiment(cfg: RunConfig) -> tuple[bytes, int]:
    if not cfg.set:
        raise ConfigError("--set is required")
    group = build_group(cfg)
    y = build_generator(cfg, group)
    A = build_set(cfg.set, group, y, cfg)
    folner = build_folner(cfg, group)
    n = _window_index(cfg)
    catalog = build_catalog(cfg.catalog, group, "intervals:6" if group.vector else "identity")
    bundle = an.preservation_experiment(y, A, folner, n, catalog, cfg.tol, workers=cfg.workers)
    _only(cfg, ("json",))
    return (json.dumps(bundle, indent=2) + "\n").encode(), EXIT_OK if bundle["verdict"] == "pass" else EXIT_FAIL


def _only(cfg: RunConfig, allowed):
    if cfg.format is not None and cfg.format not in allowed:
        raise ConfigError(f"--format {cfg.format} not available for {cfg.command}; use {'/'.join(allowed)}")


COMMANDS = {
    "generate": cmd_generate,
    "normality": cmd_normality,
    "complexity": cmd_complexity,
    "experiment": cmd_experiment,
}


# --------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="detnorm", description="Normality, complexity and tile-entropy experiments on amenable groups.")
    sub = p.add_subparsers(dest="command", metavar="command")
    for name in COMMANDS:
        sp = sub.add_parser(name, help=COMMANDS[name].__name__.replace("cmd_", ""))
        sp.add_argument("--config", help="key = value file; flags override it")
        sp.add_argument("--group", help="Z, N, Z2, Z3, Nmul, Perm")
        sp.add_argument("--gen", help="prng[:s=K], thue-morse, mult-thue-morse, balanced-parity, "
                                      "periodic:pattern=0110, constant:symbol=0, indicator:set=S, "
                                      "vh-automatic:digits=F,automaton=F")
        sp.add_argument("--seed", help="seed for prng (required there)")
        sp.add_argument("--folner", help=", ".join(FOLNERS))
        sp.add_argument("--n", help="Følner index of the window")
        sp.add_argument("--horizon", help="prefix length (generate) or selection horizon (classical)")
        sp.add_argument("--set", help="all, evens, odds, residue:r/m, squarefree, bfree:b1,b2, kfree:k, "
                                      "squares, factorial-intervals, incr:k, level:a")
        sp.add_argument("--mode", help="simple, orbit, block, classical")
        sp.add_argument("--catalog", help="intervals:M, cubes:M, identity, symmetric:M")
        sp.add_argument("--eps", help="ε for the greedy complexity")
        sp.add_argument("--tol", help="fixed tolerance (default: max(5e-3, 4σ))")
        sp.add_argument("--out", help="output file (default stdout); writes <out>.config.json too")
        sp.add_argument("--format", help="json, csv, raw (generate also: text)")
        sp.add_argument("--workers", help="threads for window scans (results do not depend on it)")
    return p


def parse_config(argv) -> RunConfig:
    ns = make_parser().parse_args(argv)
    if not ns.command:
        raise ConfigError("a command is required: " + ", ".join(COMMANDS))
    merged = read_config(ns.config) if ns.config else {}
    for key in _KEYS:
        v = getattr(ns, key, None)
        if v is not None:
            merged[key] = v
    values = {k: _coerce(k, v) for k, v in merged.items()}
    if values.get("workers") is None:
        values["workers"] = 1
    if values["workers"] < 1:
        raise ConfigError("--workers must be >= 1")
    if values.get("format") is not None and values["format"] not in FORMATS:
        raise ConfigError(f"--format must be one of {FORMATS}")
    return RunConfig(command=ns.command, **values)


def run(cfg: RunConfig) -> tuple[bytes, int]:
    return COMMANDS[cfg.command](cfg)


def main(argv=None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
        data, code = run(cfg)
    except ConfigError as e:
        print(f"detnorm: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (gc.EmptyWindowError, gen.DigitSystemError) as e:
        print(f"detnorm: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.out:
        with open(cfg.out, "wb") as fh:
            fh.write(data)
        with open(cfg.out + ".config.json", "w", encoding="utf-8") as fh:
            json.dump(cfg.echo(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())
