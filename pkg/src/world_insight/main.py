"""
world-insight command line.

Subcommands:
    validate      check a world spec, listing every violated constraint
    run           run seeded episodes and write the history log
    agent         collect statistics (live or from --log) and write a theory report
    transform     rewrite a world between definitions
    equiv-check   estimate the trace distance between two worlds
    report        re-render a saved statistics file with new c0 / half-life

Exit codes: 0 ok, 1 validation failure, 2 parse error, 3 resource cap.
"""

import argparse
import logging
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import yaml

from src.world_insight.agent import AgentLoop, build_report, simulate
from src.world_insight.config import Settings, load_settings, load_yaml_config
from src.world_insight.errors import (
    EventSemanticError,
    EventSyntaxError,
    ResourceCapError,
    SpecParseError,
    SpecValidationError,
)
from src.world_insight.events.history import read_history_log, write_history_log
from src.world_insight.theory.stats import StatStore
from src.world_insight.transforms import def2_to_def1, def3_to_def2, def4_to_def3, trace_distance
from src.world_insight.world.model import WorldDef2, WorldDef3, WorldDef4
from src.world_insight.world.spec_io import check_world_spec, dump_constant_def3, dump_def2, load_world_spec, write_spec
from src.world_insight.world.streams import Seeds
from src.world_insight.worlds import (
    DEFAULT_DOOR_SCHEDULES,
    StandardCatalog,
    TheorySetup,
    builtin_catalog_name,
    builtin_world,
    is_builtin,
    load_setup,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PARSE = 2
EXIT_RESOURCE = 3

TRANSFORMS = {("def4", "def3"), ("def3", "def2"), ("def2", "def3"), ("def2", "def1")}


def setup_logging(log_dir: str | Path = "logs", level: str = "INFO") -> Path:
    """Timestamped file log under ``log_dir`` plus the console."""
    Path(log_dir).mkdir(parents=True, exist_ok=True)
    log_file = Path(log_dir) / f"world_insight_{datetime.now().strftime('%Y%m%d_%H%M%S')}.log"
    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.INFO),
        format=LOG_FORMAT,
        handlers=[logging.FileHandler(log_file, encoding="utf-8"), logging.StreamHandler()],
    )
    logger.info(f"Logging to: {log_file}")
    return log_file


@dataclass
class RunConfig:
    """Everything a run or agent command needs; equal configs give equal bytes out."""

    world: str
    seeds: Seeds = field(default_factory=Seeds)
    episodes: int = 1
    horizon: int = 100
    tests: Optional[str] = None
    log: Optional[str] = None
    out: Optional[str] = None
    stats_out: Optional[str] = None
    settings: Settings = field(default_factory=Settings)

    def __post_init__(self) -> None:
        if self.episodes < 1:
            raise ValueError(f"episodes must be at least 1, got {self.episodes}")
        if self.horizon < 0:
            raise ValueError(f"horizon must be non-negative, got {self.horizon}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "world": self.world,
            "seeds": self.seeds.to_dict(),
            "episodes": self.episodes,
            "horizon": self.horizon,
            "tests": self.tests,
            "log": self.log,
        }


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, ResourceCapError):
        return EXIT_RESOURCE
    if isinstance(error, (SpecParseError, EventSyntaxError, EventSemanticError, yaml.YAMLError)):
        return EXIT_PARSE
    return EXIT_VALIDATION


def _failure(error: BaseException, start: float) -> Dict[str, Any]:
    logger.error(f"❌ {type(error).__name__}: {error}", exc_info=True)
    return {
        "status": "error",
        "error": str(error),
        "exit_code": exit_code_for(error),
        "duration_seconds": time.time() - start,
    }


def _success(start: float, **details: Any) -> Dict[str, Any]:
    return {"status": "success", "error": None, "exit_code": EXIT_OK, "duration_seconds": time.time() - start, **details}


def load_world(spec: str, settings: Settings) -> Any:
    """A builtin world or a world spec file."""
    if is_builtin(spec):
        try:
            return builtin_world(spec, settings)
        except KeyError as e:
            raise SpecParseError(str(e), spec) from e
    return load_world_spec(spec)


def _num_doors(spec: str) -> int:
    arg = spec.partition(":")[2].partition(":")[2]
    return len(arg.split(",")) if arg else len(DEFAULT_DOOR_SCHEDULES)


def load_theory_setup(world_spec: str, world: Any, tests: Optional[str]) -> TheorySetup:
    """The theory file when one is given, else the catalog setup of a builtin world."""
    if tests:
        return load_setup(load_yaml_config(tests), world.signature)
    if is_builtin(world_spec):
        return StandardCatalog.get_setup(builtin_catalog_name(world_spec), world.signature, _num_doors(world_spec))
    raise SpecValidationError([f"{world_spec}: no --tests file given and the world has no catalog"])


def run_validate(spec: str, settings: Settings = Settings()) -> Dict[str, Any]:
    """
    Check one world spec.

    Returns:
        Result dict; ``problems`` lists every violated constraint with its location
    """
    start = time.time()
    logger.info(f"🔎 Validating {spec}")
    try:
        if is_builtin(spec):
            load_world(spec, settings)
            problems: list[str] = []
        else:
            problems = check_world_spec(spec).problems
    except Exception as e:
        return _failure(e, start)
    if problems:
        for p in problems:
            logger.warning(f"⚠️  {p}")
        return {
            "status": "invalid",
            "error": f"{len(problems)} violation(s)",
            "exit_code": EXIT_VALIDATION,
            "problems": problems,
            "duration_seconds": time.time() - start,
        }
    logger.info(f"✅ {spec} is valid")
    return _success(start, problems=[])


def run_episodes(config: RunConfig) -> Dict[str, Any]:
    """Run seeded episodes and write their history log to ``config.out`` (stdout if None)."""
    start = time.time()
    try:
        world = load_world(config.world, config.settings)
        logger.info(f"🎲 Running {config.episodes} episode(s) of {config.horizon} step(s) on {world.name}")
        histories = simulate(
            world, config.seeds, config.episodes, config.horizon, config.settings.unpredictable_mode
        )
        header = {"world": world.name, **config.seeds.to_dict(), "horizon": config.horizon}
        if config.out:
            Path(config.out).parent.mkdir(parents=True, exist_ok=True)
            with open(config.out, "w", encoding="utf-8", newline="\n") as f:
                write_history_log(f, histories, header)
            logger.info(f"📄 History log written to {config.out}")
        else:
            write_history_log(sys.stdout, histories, header)
    except Exception as e:
        return _failure(e, start)
    return _success(start, steps=sum(len(h) for h in histories), out=config.out)


def run_agent(config: RunConfig) -> Dict[str, Any]:
    """
    Collect statistics and write the theory report.

    With ``config.log`` the recorded histories are replayed; otherwise the world
    runs live under the seeded uniform-correct-move policy.
    """
    start = time.time()
    try:
        world = load_world(config.world, config.settings)
        setup = load_theory_setup(config.world, world, config.tests)
        loop = AgentLoop(world, setup, config.settings)
        meta = {"config": config.to_dict(), "settings": config.settings.to_dict()}
        if config.log:
            store, report = loop.run_replay(read_history_log(config.log, world.signature), {"log": config.log, **meta})
        else:
            store, report, _ = loop.run_live(config.seeds, config.episodes, config.horizon, meta)
        if config.stats_out:
            store.save(config.stats_out)
        if config.out:
            report.write(config.out)
        else:
            sys.stdout.write(report.dump())
    except Exception as e:
        return _failure(e, start)
    return _success(start, records=len(report.records), out=config.out, stats_out=config.stats_out)


def transform_world(world: Any, source: str, target: str, settings: Settings, seeds: Seeds) -> Dict[str, Any]:
    """
    Apply one transform and return the resulting spec document.

    Def3 outputs are flattened over their reachable states and written with
    constant variables, so every output is a loadable spec.
    """
    if (source, target) not in TRANSFORMS:
        raise SpecValidationError([f"no transform from {source} to {target}"])
    expected = {"def2": WorldDef2, "def3": WorldDef3, "def4": WorldDef4}[source]
    if not isinstance(world, expected):
        raise SpecValidationError([f"input world is a {type(world).__name__}, not a {source} world"])
    if source == "def4":
        flat = def3_to_def2(def4_to_def3(world), cap=settings.reach_cap)
        return dump_constant_def3(flat)
    if source == "def3":
        return dump_def2(def3_to_def2(world, cap=settings.reach_cap))
    if target == "def3":
        return dump_constant_def3(world)
    determinized = def2_to_def1(world, seeds)
    return {
        "kind": "def1",
        "name": determinized.name,
        "base": dump_def2(world),
        "seeds": {"good": determinized.good_seed, "bad": determinized.bad_seed},
    }


def run_transform(
    source: str, target: str, spec_in: str, spec_out: str, settings: Settings = Settings(), seeds: Seeds = Seeds()
) -> Dict[str, Any]:
    start = time.time()
    logger.info(f"🔁 Transforming {spec_in} ({source} -> {target})")
    try:
        world = load_world(spec_in, settings)
        document = transform_world(world, source, target, settings, seeds)
        Path(spec_out).parent.mkdir(parents=True, exist_ok=True)
        write_spec(document, spec_out)
    except Exception as e:
        return _failure(e, start)
    logger.info(f"✅ Wrote {target} spec to {spec_out}")
    return _success(start, out=spec_out)


def run_equiv_check(
    spec_a: str,
    spec_b: str,
    episodes: int,
    horizon: int,
    seeds: Seeds = Seeds(),
    settings: Settings = Settings(),
    out: Optional[str] = None,
) -> Dict[str, Any]:
    start = time.time()
    try:
        world_a = load_world(spec_a, settings)
        world_b = load_world(spec_b, settings)
        report = trace_distance(
            world_a, world_b, episodes=episodes, horizon=horizon, seeds=seeds, mode=settings.unpredictable_mode
        )
        text = yaml.safe_dump({"a": spec_a, "b": spec_b, **report.to_dict()}, sort_keys=False)
        if out:
            Path(out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    except Exception as e:
        return _failure(e, start)
    return _success(start, distance=report.distance, out=out)


def run_report(stats: str, settings: Settings = Settings(), out: Optional[str] = None) -> Dict[str, Any]:
    """Re-render a statistics file saved by ``agent --stats-out``."""
    start = time.time()
    try:
        store = StatStore.load(stats)
        report = build_report(store, settings.c0, settings.half_life, settings.adaptive_half_life)
        if out:
            report.write(out)
        else:
            sys.stdout.write(report.dump())
    except Exception as e:
        return _failure(e, start)
    return _success(start, records=len(report.records), out=out)


def _add_seed_flags(parser: argparse.ArgumentParser) -> None:
    for channel in ("predictable", "unpredictable", "noise", "policy"):
        parser.add_argument(f"--seed-{channel}", type=int, default=0, help=f"Seed of the {channel} stream")


def _add_theory_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--c0", type=float, default=None, help="Confidence constant")
    parser.add_argument("--half-life", type=float, default=None, help="Stability half-life in steps")
    parser.add_argument("--adaptive-half-life", action="store_true", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="world-insight", description="Interval-probability worlds and theories")
    parser.add_argument("--settings", default=None, help="YAML file replacing the bundled defaults")
    parser.add_argument("--log-dir", default=None, help="Directory of the run log")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="Check a world spec")
    p.add_argument("spec")

    for name, help_text in (("run", "Write a history log"), ("agent", "Collect statistics and report theories")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("spec", help="World spec file or builtin:chess / builtin:doors[:L,U,...]")
        _add_seed_flags(p)
        p.add_argument("--episodes", type=int, default=1)
        p.add_argument("--horizon", type=int, default=100)
        p.add_argument("--out", default=None)
        if name == "agent":
            _add_theory_flags(p)
            p.add_argument("--tests", default=None, help="Experiments, tests and groupings (YAML)")
            p.add_argument("--log", default=None, help="Replay this history log instead of running live")
            p.add_argument("--stats-out", default=None, help="Save the statistics for `report`")

    p = sub.add_parser("transform", help="Rewrite a world between definitions")
    p.add_argument("--from", dest="source", required=True, choices=("def2", "def3", "def4"))
    p.add_argument("--to", dest="target", required=True, choices=("def1", "def2", "def3"))
    p.add_argument("spec_in")
    p.add_argument("spec_out")
    _add_seed_flags(p)

    p = sub.add_parser("equiv-check", help="Estimate the trace distance of two worlds")
    p.add_argument("spec_a")
    p.add_argument("spec_b")
    p.add_argument("--episodes", type=int, default=1000)
    p.add_argument("--horizon", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("report", help="Re-render a saved statistics file")
    p.add_argument("stats")
    _add_theory_flags(p)
    p.add_argument("--out", default=None)
    return parser


def _seeds(args: argparse.Namespace) -> Seeds:
    return Seeds(args.seed_predictable, args.seed_unpredictable, args.seed_noise, args.seed_policy)


def dispatch(args: argparse.Namespace, settings: Settings) -> Dict[str, Any]:
    if args.command == "validate":
        return run_validate(args.spec, settings)
    if args.command in ("run", "agent"):
        config = RunConfig(
            world=args.spec,
            seeds=_seeds(args),
            episodes=args.episodes,
            horizon=args.horizon,
            tests=getattr(args, "tests", None),
            log=getattr(args, "log", None),
            out=args.out,
            stats_out=getattr(args, "stats_out", None),
            settings=settings,
        )
        return run_episodes(config) if args.command == "run" else run_agent(config)
    if args.command == "transform":
        return run_transform(args.source, args.target, args.spec_in, args.spec_out, settings, _seeds(args))
    if args.command == "equiv-check":
        seeds = Seeds(args.seed, args.seed, args.seed, args.seed)
        return run_equiv_check(args.spec_a, args.spec_b, args.episodes, args.horizon, seeds, settings, args.out)
    return run_report(args.stats, settings, args.out)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run one subcommand and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_PARSE if e.code else EXIT_OK
    try:
        settings = load_settings(
            args.settings,
            c0=getattr(args, "c0", None),
            half_life=getattr(args, "half_life", None),
            adaptive_half_life=getattr(args, "adaptive_half_life", None),
        )
    except (OSError, yaml.YAMLError) as e:
        logger.error(f"❌ Could not load settings: {e}")
        return EXIT_PARSE
    except ValueError as e:
        logger.error(f"❌ Invalid settings: {e}")
        return EXIT_VALIDATION
    setup_logging(args.log_dir or settings.log_dir, settings.log_level)

    logger.info("=" * 80)
    logger.info(f"world-insight {args.command}")
    logger.info("=" * 80)
    try:
        result = dispatch(args, settings)
    except ValueError as e:
        logger.error(f"❌ {e}", exc_info=True)
        return EXIT_VALIDATION
    if result["status"] == "success":
        logger.info(f"✅ {args.command} finished in {result['duration_seconds']:.2f}s")
    else:
        logger.error(f"❌ {args.command} failed: {result['error']}")
    return int(result["exit_code"])


if __name__ == "__main__":
    sys.exit(main())
