"""INI run configurations for the batch front end.

A config names one problem, optionally an exhaustion schedule, exactly one
command with its parameters, an output directory, and tolerance overrides:

    [problem]
    p = 2.0
    d = 3
    domain = 0 inf
    potential = zero

    [exhaustion]
    style = balls
    count = 9
    base = 2.0
    growth = 2.0
    x0 = 1.0

    [command]
    name = critical
    resolution = 801

    [output]
    dir = out

Potentials are written as "zero", "constant <c>", "power <c> <s>" (c * |r|^s),
"bump <center> <radius> <height>", or a sum of those joined with " + ".
Intervals are two whitespace-separated numbers; "inf" and "-inf" are allowed
where the model allows them.
"""
from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DomainError, PcritError
from .model import ExhaustionSchedule, PotentialSpec, RadialProblem, make_exhaustion

__all__ = ["ConfigError", "RunConfig", "parse_config", "parse_potential", "COMMANDS"]

COMMANDS = ("eig", "solve", "critical", "capacity", "mingrowth", "certify", "validate")


class ConfigError(PcritError):
    """Malformed or inconsistent run configuration."""


@dataclass(frozen=True)
class RunConfig:
    problem: RadialProblem
    exhaustion: ExhaustionSchedule | None
    command: str
    params: dict
    out_dir: Path
    tolerances: dict
    config_sha256: str
    source_path: Path


def _parse_number(tok: str, where: str) -> float:
    t = tok.strip().lower()
    try:
        if t in ("inf", "+inf", "infinity"):
            return float("inf")
        if t == "-inf":
            return float("-inf")
        return float(tok)
    except ValueError:
        raise ConfigError(f"{where}: {tok!r} is not a number") from None


def _parse_interval(text: str, where: str) -> tuple[float, float]:
    toks = text.split()
    if len(toks) != 2:
        raise ConfigError(f"{where}: expected two numbers, got {text!r}")
    return _parse_number(toks[0], where), _parse_number(toks[1], where)


def parse_potential(text: str) -> PotentialSpec:
    """Parse the potential mini-language (see the module docstring)."""
    total: PotentialSpec | None = None
    for part in text.split("+"):
        toks = part.split()
        if not toks:
            raise ConfigError(f"empty potential term in {text!r}")
        kind, args = toks[0].lower(), toks[1:]
        where = f"potential term {part.strip()!r}"
        if kind == "zero":
            if args:
                raise ConfigError(f"{where}: takes no arguments")
            term = PotentialSpec.zero()
        elif kind == "constant":
            if len(args) != 1:
                raise ConfigError(f"{where}: needs one argument")
            term = PotentialSpec.constant(_parse_number(args[0], where))
        elif kind == "power":
            if len(args) != 2:
                raise ConfigError(f"{where}: needs coefficient and exponent")
            term = PotentialSpec.power(
                _parse_number(args[0], where), _parse_number(args[1], where)
            )
        elif kind == "bump":
            if len(args) not in (2, 3):
                raise ConfigError(f"{where}: needs center, radius [, height]")
            height = _parse_number(args[2], where) if len(args) == 3 else 1.0
            term = PotentialSpec.bump(
                _parse_number(args[0], where), _parse_number(args[1], where), height
            )
        else:
            raise ConfigError(f"{where}: unknown potential kind {kind!r}")
        total = term if total is None else PotentialSpec.combination(total, term, 1.0)
    assert total is not None
    return total


def _parse_levels(text: str, where: str) -> tuple[tuple[float, float], ...]:
    levels = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if chunk:
            levels.append(_parse_interval(chunk, where))
    if not levels:
        raise ConfigError(f"{where}: no levels given")
    return tuple(levels)


def _get(section, key: str, where: str) -> str:
    if key not in section:
        raise ConfigError(f"missing key {key!r} in [{where}]")
    return section[key]


def parse_config(
    path: str | Path,
    seed: int | None = None,
    out_override: str | None = None,
    tol_override: float | None = None,
    levels_override: int | None = None,
) -> RunConfig:
    """Read and validate a run configuration file."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    digest = hashlib.sha256(raw).hexdigest()

    cp = configparser.ConfigParser()
    try:
        cp.read_string(raw.decode("utf-8"), source=str(path))
    except UnicodeDecodeError:
        raise ConfigError(f"{path}: not valid UTF-8") from None
    except configparser.Error as e:
        raise ConfigError(f"{path}: {e}") from None

    if "problem" not in cp:
        raise ConfigError(f"{path}: missing [problem] section")
    prob_sec = cp["problem"]
    p = _parse_number(_get(prob_sec, "p", "problem"), "[problem] p")
    d_raw = _get(prob_sec, "d", "problem")
    try:
        d = int(d_raw)
    except ValueError:
        raise ConfigError(f"[problem] d: {d_raw!r} is not an integer") from None
    domain = _parse_interval(_get(prob_sec, "domain", "problem"), "[problem] domain")
    potential = parse_potential(prob_sec.get("potential", "zero"))
    try:
        problem = RadialProblem(p=p, d=d, domain=domain, potential=potential)
    except (ValueError, DomainError) as e:
        raise ConfigError(f"[problem]: {e}") from None

    exhaustion = None
    if "exhaustion" in cp:
        ex_sec = cp["exhaustion"]
        count = int(ex_sec.get("count", "8"))
        if levels_override is not None:
            count = levels_override
        if "levels" in ex_sec:
            levels = _parse_levels(ex_sec["levels"], "[exhaustion] levels")
            if levels_override is not None:
                levels = levels[:levels_override]
            x0 = _parse_number(ex_sec.get("x0", str(sum(levels[0]) / 2)), "[exhaustion] x0")
            x1 = (
                _parse_number(ex_sec["x1"], "[exhaustion] x1")
                if "x1" in ex_sec
                else None
            )
            try:
                exhaustion = ExhaustionSchedule(levels, x0=x0, x1=x1)
            except ValueError as e:
                raise ConfigError(f"[exhaustion]: {e}") from None
        else:
            style = ex_sec.get("style", "auto")
            base = _parse_number(ex_sec.get("base", "1.0"), "[exhaustion] base")
            growth = _parse_number(ex_sec.get("growth", "2.0"), "[exhaustion] growth")
            x0 = (
                _parse_number(ex_sec["x0"], "[exhaustion] x0") if "x0" in ex_sec else None
            )
            x1 = (
                _parse_number(ex_sec["x1"], "[exhaustion] x1") if "x1" in ex_sec else None
            )
            try:
                exhaustion = make_exhaustion(
                    problem, count, base=base, growth=growth, style=style, x0=x0, x1=x1
                )
            except (ValueError, DomainError) as e:
                raise ConfigError(f"[exhaustion]: {e}") from None

    if "command" not in cp:
        raise ConfigError(f"{path}: missing [command] section")
    cmd_sec = cp["command"]
    command = _get(cmd_sec, "name", "command").strip().lower()
    if command not in COMMANDS:
        raise ConfigError(
            f"[command] name: unknown command {command!r} (one of {', '.join(COMMANDS)})"
        )
    params = {k: v for k, v in cmd_sec.items() if k != "name"}
    if seed is not None:
        params["seed"] = str(seed)
    params.setdefault("seed", "12345")

    out_dir = Path(cp["output"].get("dir", ".")) if "output" in cp else Path(".")
    if out_override is not None:
        out_dir = Path(out_override)

    tolerances: dict = {}
    if "tolerances" in cp:
        for k, v in cp["tolerances"].items():
            tolerances[k] = _parse_number(v, f"[tolerances] {k}")
    if tol_override is not None:
        tolerances["residual_tol"] = float(tol_override)

    return RunConfig(
        problem=problem,
        exhaustion=exhaustion,
        command=command,
        params=params,
        out_dir=out_dir,
        tolerances=tolerances,
        config_sha256=digest,
        source_path=path,
    )
