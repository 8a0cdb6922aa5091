"""Run configuration: one declarative YAML file plus flag overrides."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .relevance import Bm25Params
from .trends import TopicVector, compile_patterns

__all__ = [
    "ConfigError",
    "PagerankSettings",
    "BetweennessSettings",
    "TrendSettings",
    "ReportSettings",
    "RunConfig",
    "load_config",
    "parse_topic_flag",
]

OUTPUT_DIR_ENV = "BIBMETRICS_OUTPUT_DIR"

# Node sizing follows the common reading of the network figures: PageRank
# for author and institution graphs, betweenness for country graphs.
DEFAULT_SIZING = {"author": "pagerank", "institution": "pagerank", "country": "betweenness"}


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class PagerankSettings:
    damping: float = 0.85
    tol: float = 1e-10
    max_iter: int = 200
    weighted: bool = False


@dataclass(frozen=True)
class BetweennessSettings:
    normalized: bool = True
    weighted: bool = False


@dataclass(frozen=True)
class TrendSettings:
    window_years: int = 3
    top_k: int = 4
    mode: str = "magnitude"
    inclusive_window: bool = False
    smoothing: bool = False
    restrict_window: bool = False


@dataclass(frozen=True)
class ReportSettings:
    table_limit: int = 20
    year_range: tuple[int, int] | None = None
    min_node_size: float = 1.0
    max_node_size: float = 10.0
    sizing: dict = field(default_factory=lambda: dict(DEFAULT_SIZING))


@dataclass
class RunConfig:
    inputs: list[Path] = field(default_factory=list)
    input_format: str = "auto"
    topics: list[TopicVector] = field(default_factory=list)
    query_levels: dict[str, list[str]] = field(default_factory=dict)
    bm25: Bm25Params = field(default_factory=Bm25Params)
    pagerank: PagerankSettings = field(default_factory=PagerankSettings)
    betweenness: BetweennessSettings = field(default_factory=BetweennessSettings)
    trend: TrendSettings = field(default_factory=TrendSettings)
    report: ReportSettings = field(default_factory=ReportSettings)
    aliases_path: Path | None = None
    output_dir: Path = Path("out")
    strict: bool = False
    threads: int = 1
    clock: str | None = None
    latin1_fallback: bool = False
    csv_header_map: dict[str, str] | None = None


def _require(mapping: dict, section: str, allowed: set[str]) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"unknown {section} key(s): {', '.join(sorted(unknown))}")


def _topic_from_entry(entry) -> TopicVector:
    if not isinstance(entry, dict) or "name" not in entry or "patterns" not in entry:
        raise ConfigError(f"topic entries need 'name' and 'patterns': {entry!r}")
    topic = TopicVector(name=str(entry["name"]), patterns=[str(p) for p in entry["patterns"]])
    try:
        compile_patterns(topic.patterns)
    except ValueError as exc:
        raise ConfigError(f"topic {topic.name!r}: {exc}") from exc
    return topic


def parse_topic_flag(text: str) -> TopicVector:
    """Parse a ``--topic`` value: ``Name: pattern; pattern``."""
    name, sep, patterns = text.partition(":")
    if not sep or not name.strip():
        raise ConfigError(f"--topic expects 'Name: pattern; pattern', got {text!r}")
    return _topic_from_entry(
        {"name": name.strip(), "patterns": [p.strip() for p in patterns.split(";") if p.strip()]}
    )


def load_config(path: str | Path) -> RunConfig:
    """Read a YAML config file into a RunConfig with defaults applied."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")

    _require(
        data,
        "config",
        {
            "inputs", "input_format", "topics", "query_levels", "bm25", "pagerank",
            "betweenness", "trend", "report", "aliases_path", "output_dir", "strict",
            "threads", "clock", "latin1_fallback", "csv_header_map",
        },
    )
    config = RunConfig()
    base = Path(path).parent

    if "inputs" in data:
        config.inputs = [_resolve(base, p) for p in _as_list(data["inputs"], "inputs")]
    if "input_format" in data:
        config.input_format = _choice(data["input_format"], ("auto", "tagged", "csv"), "input_format")
    if "topics" in data:
        config.topics = [_topic_from_entry(t) for t in _as_list(data["topics"], "topics")]
        names = [t.name for t in config.topics]
        if len(set(names)) != len(names):
            raise ConfigError("topic names must be unique")
    if "query_levels" in data:
        levels = data["query_levels"]
        if not isinstance(levels, dict):
            raise ConfigError("query_levels must map level name -> pattern list")
        config.query_levels = {
            str(name): [str(p) for p in _as_list(patterns, f"query_levels.{name}")]
            for name, patterns in levels.items()
        }
        for name, patterns in config.query_levels.items():
            try:
                compile_patterns(patterns)
            except ValueError as exc:
                raise ConfigError(f"query level {name!r}: {exc}") from exc
    if "bm25" in data:
        section = _as_dict(data["bm25"], "bm25")
        _require(section, "bm25", {"k1", "b"})
        try:
            config.bm25 = Bm25Params(
                k1=float(section.get("k1", config.bm25.k1)),
                b=float(section.get("b", config.bm25.b)),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if "pagerank" in data:
        section = _as_dict(data["pagerank"], "pagerank")
        _require(section, "pagerank", {"damping", "tol", "max_iter", "weighted"})
        config.pagerank = replace(
            config.pagerank,
            damping=float(section.get("damping", config.pagerank.damping)),
            tol=float(section.get("tol", config.pagerank.tol)),
            max_iter=int(section.get("max_iter", config.pagerank.max_iter)),
            weighted=bool(section.get("weighted", config.pagerank.weighted)),
        )
    if "betweenness" in data:
        section = _as_dict(data["betweenness"], "betweenness")
        _require(section, "betweenness", {"normalized", "weighted"})
        config.betweenness = replace(
            config.betweenness,
            normalized=bool(section.get("normalized", True)),
            weighted=bool(section.get("weighted", False)),
        )
    if "trend" in data:
        section = _as_dict(data["trend"], "trend")
        _require(
            section, "trend",
            {"window_years", "top_k", "mode", "inclusive_window", "smoothing", "restrict_window"},
        )
        config.trend = replace(
            config.trend,
            window_years=int(section.get("window_years", config.trend.window_years)),
            top_k=int(section.get("top_k", config.trend.top_k)),
            mode=_choice(section.get("mode", config.trend.mode), ("magnitude", "literal"), "trend.mode"),
            inclusive_window=bool(section.get("inclusive_window", False)),
            smoothing=bool(section.get("smoothing", False)),
            restrict_window=bool(section.get("restrict_window", False)),
        )
    if "report" in data:
        section = _as_dict(data["report"], "report")
        _require(section, "report", {"table_limit", "year_range", "min_node_size", "max_node_size", "sizing"})
        year_range = section.get("year_range")
        if year_range is not None:
            pair = _as_list(year_range, "report.year_range")
            if len(pair) != 2:
                raise ConfigError("report.year_range must be [start, end]")
            year_range = (int(pair[0]), int(pair[1]))
        sizing = dict(DEFAULT_SIZING)
        for kind, measure in _as_dict(section.get("sizing", {}), "report.sizing").items():
            if kind not in sizing:
                raise ConfigError(f"report.sizing: unknown graph kind {kind!r}")
            sizing[kind] = _choice(measure, ("pagerank", "betweenness"), f"report.sizing.{kind}")
        config.report = replace(
            config.report,
            table_limit=int(section.get("table_limit", config.report.table_limit)),
            year_range=year_range,
            min_node_size=float(section.get("min_node_size", config.report.min_node_size)),
            max_node_size=float(section.get("max_node_size", config.report.max_node_size)),
            sizing=sizing,
        )
    if "aliases_path" in data and data["aliases_path"] is not None:
        config.aliases_path = _resolve(base, data["aliases_path"])
    if "output_dir" in data:
        config.output_dir = _resolve(base, data["output_dir"])
    if "strict" in data:
        config.strict = bool(data["strict"])
    if "threads" in data:
        config.threads = int(data["threads"])
    if "clock" in data and data["clock"] is not None:
        config.clock = str(data["clock"])
    if "latin1_fallback" in data:
        config.latin1_fallback = bool(data["latin1_fallback"])
    if "csv_header_map" in data and data["csv_header_map"] is not None:
        section = _as_dict(data["csv_header_map"], "csv_header_map")
        config.csv_header_map = {str(k): str(v) for k, v in section.items()}
    return config


def _resolve(base: Path, value) -> Path:
    p = Path(str(value))
    return p if p.is_absolute() else base / p


def _as_list(value, what: str) -> list:
    if not isinstance(value, list):
        raise ConfigError(f"{what} must be a list")
    return value


def _as_dict(value, what: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{what} must be a mapping")
    return value


def _choice(value, allowed: tuple[str, ...], what: str) -> str:
    value = str(value)
    if value not in allowed:
        raise ConfigError(f"{what} must be one of {', '.join(allowed)}; got {value!r}")
    return value
