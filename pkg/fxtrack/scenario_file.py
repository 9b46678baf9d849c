"""
YAML scenario files (schema_version 1).

Parsing is strict: unknown keys, wrong types and inconsistent declared
bounds are rejected with the line of the offending node. See README.md for
the schema.
"""

import logging
import os
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import yaml

from .engine import Integrator, SimConfig
from .generator import GainParams, StagedGain
from .observers import ObserverGains, ObserverState
from .scenarios import FollowerSpec, LeaderSpec, PlantSpec, ReferenceSpec
from .signals import Signal, check_bound
from .simulation import Scenario
from .topology import Topology, TrackingMode
from .validation import ScenarioFileError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

Path = Tuple[Union[str, int], ...]

SECTIONS = {
    "schema_version", "name", "description", "mode", "topology", "gains",
    "timing", "plant", "signals", "initial", "sim",
}
TOPOLOGY_KEYS = {"n", "directed", "edges", "adjacency", "leader_links"}
GAIN_KEYS = {"rho", "k", "delta", "b1", "b2", "c1", "c2", "boundary_layer", "stages"}
STAGE_NAMES = ("a1", "a2", "b1", "b2")
TIMING_KEYS = {"t_a1", "t_a2", "t_b1", "t_b2", "T_c"}
PLANT_KEYS = {"z1", "z2"}
SIGNAL_KEYS = {"disturbance", "disturbance_bound", "u0", "u_max", "d", "d_max", "d_bar", "a_r", "a_max"}
INITIAL_KEYS = {"leader", "x", "v", "random", "r", "f", "alpha", "beta"}
SIM_KEYS = {"dt", "horizon", "seed", "integrator", "decimation"}

# Used where a file leaves a setting out; callers may override any of them.
DEFAULTS: Dict[str, Any] = {
    "dt": 1e-4,
    "decimation": 100,
    "integrator": "euler",
    "seed": 0,
    "init_low": -10.0,
    "init_high": 10.0,
}


def _line_map(node: yaml.Node, path: Path = (), lines: Optional[Dict[Path, int]] = None) -> Dict[Path, int]:
    """1-based line of every node, keyed by its path in the document."""
    if lines is None:
        lines = {}
    lines[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            key = key_node.value
            _line_map(value_node, path + (key,), lines)
            lines[path + (key,)] = key_node.start_mark.line + 1
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            _line_map(item, path + (i,), lines)
    return lines


class _Document:
    """Parsed YAML plus node lines for error reporting."""

    def __init__(self, data: Dict[str, Any], lines: Dict[Path, int], source: Optional[str]):
        self.data = data
        self.lines = lines
        self.source = source

    def line(self, path: Path) -> Optional[int]:
        while path not in self.lines and path:
            path = path[:-1]
        return self.lines.get(path)

    def error(self, path: Path, message: str) -> ScenarioFileError:
        where = ".".join(str(p) for p in path)
        text = f"{where}: {message}" if where else message
        return ScenarioFileError(text, line=self.line(path), path=self.source)

    def lookup(self, path: Path) -> Any:
        value = self.data
        for key in path:
            if isinstance(value, dict):
                value = value.get(key)
            elif isinstance(value, list) and isinstance(key, int) and key < len(value):
                value = value[key]
            else:
                return None
        return value

    def mapping(self, path: Path, allowed: set, required: bool = False) -> Dict[str, Any]:
        value = self.lookup(path)
        if value is None:
            if required:
                raise self.error(path, "section is required")
            return {}
        if not isinstance(value, dict):
            raise self.error(path, "expected a mapping")
        for key in value:
            if key not in allowed:
                raise self.error(path + (key,), f"unknown key (allowed: {', '.join(sorted(allowed))})")
        return value

    def number(self, path: Path, default: Any = None, required: bool = False,
               positive: bool = False, nonnegative: bool = False) -> Optional[float]:
        value = self.lookup(path)
        if value is None:
            if required:
                raise self.error(path, "value is required")
            return default
        if isinstance(value, bool):
            raise self.error(path, f"expected a number, got {value!r}")
        # YAML 1.1 reads 1e-4 (no dot) as a string
        try:
            number = float(value)
        except (TypeError, ValueError):
            raise self.error(path, f"expected a number, got {value!r}") from None
        if not np.isfinite(number):
            raise self.error(path, "value must be finite")
        if positive and not number > 0:
            raise self.error(path, f"must be positive, got {number:g}")
        if nonnegative and number < 0:
            raise self.error(path, f"must be nonnegative, got {number:g}")
        return number

    def integer(self, path: Path, default: Optional[int] = None) -> Optional[int]:
        value = self.lookup(path)
        if value is None:
            return default
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.error(path, f"expected an integer, got {value!r}")
        return value

    def vector(self, path: Path, n: Optional[int] = None, required: bool = False) -> Optional[np.ndarray]:
        value = self.lookup(path)
        if value is None:
            if required:
                raise self.error(path, "list is required")
            return None
        if not isinstance(value, list):
            raise self.error(path, "expected a list of numbers")
        result = np.array([self.number(path + (i,), required=True) for i in range(len(value))])
        if n is not None and result.size != n:
            raise self.error(path, f"expected {n} entries, got {result.size}")
        return result

    def signal(self, path: Path, default: Optional[Signal] = None) -> Optional[Signal]:
        value = self.lookup(path)
        if value is None:
            return default
        try:
            return Signal.from_dict(value)
        except (TypeError, ValueError) as e:
            raise self.error(path, str(e)) from None

    def signals(self, path: Path, n: int) -> Tuple[Signal, ...]:
        """One signal for everyone or a list of n."""
        value = self.lookup(path)
        if value is None:
            return tuple(Signal() for _ in range(n))
        if isinstance(value, list):
            if len(value) != n:
                raise self.error(path, f"expected {n} signals, got {len(value)}")
            return tuple(self.signal(path + (i,)) for i in range(n))
        shared = self.signal(path)
        return tuple(shared for _ in range(n))


def _parse_document(text: str, source: Optional[str]) -> _Document:
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(e, "problem", None) or str(e)
        raise ScenarioFileError(f"YAML syntax error: {problem}", line=line, path=source) from None
    if not isinstance(data, dict) or root is None:
        raise ScenarioFileError("Scenario file must be a YAML mapping", line=1, path=source)
    return _Document(data, _line_map(root), source)


def _stage_params(doc: _Document, base: GainParams) -> Dict[str, GainParams]:
    stages = doc.mapping(("gains", "stages"), set(STAGE_NAMES))
    params = {}
    for name in STAGE_NAMES:
        path = ("gains", "stages", name)
        if name not in stages:
            params[name] = base
            continue
        doc.mapping(path, {"k", "delta"})
        params[name] = _gain_params(
            doc, path,
            doc.number(path + ("k",), default=base.k),
            doc.number(path + ("delta",), default=base.delta),
        )
    return params


def _gain_params(doc: _Document, path: Path, k: float, delta: float) -> GainParams:
    try:
        return GainParams(k, delta)
    except ValueError as e:
        raise doc.error(path, str(e)) from None


def _topology(doc: _Document, mode: TrackingMode) -> Topology:
    section = doc.mapping(("topology",), TOPOLOGY_KEYS, required=True)
    directed = section.get("directed", mode == TrackingMode.DIRECTED_CT)
    if not isinstance(directed, bool):
        raise doc.error(("topology", "directed"), "expected true or false")
    if ("edges" in section) == ("adjacency" in section):
        raise doc.error(("topology",), "give exactly one of 'edges' or 'adjacency'")
    n = doc.integer(("topology", "n"))
    try:
        if "adjacency" in section:
            rows = section["adjacency"]
            if not isinstance(rows, list) or not rows:
                raise doc.error(("topology", "adjacency"), "expected a square matrix")
            matrix = np.array([doc.vector(("topology", "adjacency", i), len(rows), required=True)
                               for i in range(len(rows))])
            if n is not None and n != matrix.shape[0]:
                raise doc.error(("topology", "n"), f"n={n} but adjacency is {matrix.shape[0]}x{matrix.shape[0]}")
            n = matrix.shape[0]
            links = doc.vector(("topology", "leader_links"), n)
            return Topology(matrix, np.zeros(n) if links is None else links, directed)
        if n is None:
            raise doc.error(("topology", "n"), "n is required with an edge list")
        edges = section["edges"]
        if not isinstance(edges, list):
            raise doc.error(("topology", "edges"), "expected a list of [i, j] or [i, j, weight]")
        parsed = [doc.vector(("topology", "edges", e), required=True) for e in range(len(edges))]
        links = doc.vector(("topology", "leader_links"), n)
        for e, edge in enumerate(parsed):
            if edge.size not in (2, 3):
                raise doc.error(("topology", "edges", e), "edge must be [i, j] or [i, j, weight]")
        return Topology.from_edges(n, parsed, links, directed)
    except ScenarioFileError:
        raise
    except ValueError as e:
        raise doc.error(("topology",), str(e)) from None


def _check_declared_bound(doc: _Document, key: str, name: str, signals: Sequence[Signal],
                          bound: float, horizon: float) -> None:
    problems = check_bound(name, list(signals), bound, horizon)
    if problems:
        raise doc.error(("signals", key), "; ".join(problems))


def _followers(doc: _Document, n: int, seed: int, disturbances, d_max: float,
               defaults: Dict[str, Any]) -> FollowerSpec:
    initial = doc.mapping(("initial",), INITIAL_KEYS)
    if "random" in initial:
        if "x" in initial or "v" in initial:
            raise doc.error(("initial", "random"), "give either random or explicit x/v, not both")
        doc.mapping(("initial", "random"), {"low", "high"})
        low = doc.number(("initial", "random", "low"), default=defaults["init_low"])
        high = doc.number(("initial", "random", "high"), default=defaults["init_high"])
        if not low < high:
            raise doc.error(("initial", "random"), f"low={low:g} must be below high={high:g}")
        return FollowerSpec.random(n, seed, low, high, disturbances, d_max)
    x = doc.vector(("initial", "x"), n)
    v = doc.vector(("initial", "v"), n)
    if x is None or v is None:
        raise doc.error(("initial",), "followers need explicit x and v or a random range")
    return FollowerSpec(x, v, disturbances, d_max)


def scenario_from_document(doc: _Document, defaults: Optional[Dict[str, Any]] = None) -> Scenario:
    defaults = dict(DEFAULTS, **(defaults or {}))
    for key in doc.data:
        if key not in SECTIONS:
            raise doc.error((key,), f"unknown section (allowed: {', '.join(sorted(SECTIONS))})")
    version = doc.lookup(("schema_version",))
    if version != SCHEMA_VERSION:
        raise doc.error(("schema_version",), f"unsupported schema_version {version!r}, expected {SCHEMA_VERSION}")
    try:
        mode = TrackingMode(doc.lookup(("mode",)))
    except ValueError:
        raise doc.error(("mode",), f"mode must be one of {', '.join(m.value for m in TrackingMode)}") from None

    doc.mapping(("sim",), SIM_KEYS)
    try:
        sim = SimConfig(
            dt=doc.number(("sim", "dt"), default=defaults["dt"], positive=True),
            horizon=doc.number(("sim", "horizon"), required=True, positive=True),
            integrator=Integrator(doc.lookup(("sim", "integrator")) or defaults["integrator"]),
            seed=doc.integer(("sim", "seed"), default=defaults["seed"]),
            decimation=doc.integer(("sim", "decimation"), default=defaults["decimation"]),
        )
    except ValueError as e:
        raise doc.error(("sim",), str(e)) from None

    gains = doc.mapping(("gains",), GAIN_KEYS, required=True)
    base = _gain_params(doc, ("gains",), doc.number(("gains", "k"), default=2.0),
                        doc.number(("gains", "delta"), default=0.01))
    params = _stage_params(doc, base)
    timing = doc.mapping(("timing",), TIMING_KEYS, required=True)
    schedule = StagedGain.polynomial(
        doc.number(("timing", "t_a1"), required=True, positive=True),
        doc.number(("timing", "t_a2"), required=True, positive=True),
        params["a1"], params["a2"],
    )
    rho = doc.number(("gains", "rho"), required=True, positive=True)
    boundary_layer = doc.number(("gains", "boundary_layer"), positive=True)
    signals = doc.mapping(("signals",), SIGNAL_KEYS)
    horizon = sim.horizon

    fields: Dict[str, Any] = {}
    if mode == TrackingMode.SMC:
        doc.mapping(("plant",), PLANT_KEYS, required=True)
        disturbance = doc.signal(("signals", "disturbance"), Signal())
        bound = doc.number(("signals", "disturbance_bound"), default=0.0, nonnegative=True)
        _check_declared_bound(doc, "disturbance_bound", "disturbance", [disturbance], bound, horizon)
        fields["plant"] = PlantSpec(
            doc.number(("plant", "z1"), required=True),
            doc.number(("plant", "z2"), required=True),
            disturbance, bound,
        )
    else:
        for key in ("b1", "b2", "c1", "c2"):
            if key not in gains:
                raise doc.error(("gains",), f"{mode.value} needs observer gain {key}")
        h2 = StagedGain.polynomial(
            doc.number(("timing", "t_b1"), required=True, positive=True),
            doc.number(("timing", "t_b2"), required=True, positive=True),
            params["b1"], params["b2"],
        )
        observer = ObserverGains(
            doc.number(("gains", "b1"), required=True),
            doc.number(("gains", "b2"), required=True),
            doc.number(("gains", "c1"), required=True),
            doc.number(("gains", "c2"), required=True),
            h2,
        )
        topology = _topology(doc, mode)
        n = topology.n
        d_max = doc.number(("signals", "d_max"), default=0.0, nonnegative=True)
        disturbances = doc.signals(("signals", "d"), n)
        _check_declared_bound(doc, "d_max", "d", disturbances, d_max, horizon)
        followers = _followers(doc, n, sim.seed, disturbances, d_max, defaults)
        fields.update(
            topology=topology,
            observer=observer,
            followers=followers,
            t_c=doc.number(("timing", "T_c"), positive=True),
            d_bar=doc.number(("signals", "d_bar"), nonnegative=True),
        )
        if mode == TrackingMode.DAT:
            a_max = doc.number(("signals", "a_max"), required=True, nonnegative=True)
            accelerations = doc.signals(("signals", "a_r"), n)
            _check_declared_bound(doc, "a_max", "a_r", accelerations, a_max, horizon)
            r = doc.vector(("initial", "r"), n)
            f = doc.vector(("initial", "f"), n)
            fields["references"] = ReferenceSpec(
                np.zeros(n) if r is None else r, np.zeros(n) if f is None else f, accelerations, a_max,
            )
        else:
            u0 = doc.signal(("signals", "u0"), Signal())
            u_max = doc.number(("signals", "u_max"), default=0.0, nonnegative=True)
            _check_declared_bound(doc, "u_max", "u0", [u0], u_max, horizon)
            doc.mapping(("initial", "leader"), {"x0", "v0"})
            fields["leader"] = LeaderSpec(
                doc.number(("initial", "leader", "x0"), default=0.0),
                doc.number(("initial", "leader", "v0"), default=0.0),
                u0, u_max,
            )
        alpha = doc.vector(("initial", "alpha"), n)
        beta = doc.vector(("initial", "beta"), n)
        if (alpha is None) != (beta is None):
            raise doc.error(("initial",), "give both alpha and beta or neither")
        if alpha is not None:
            if mode == TrackingMode.DAT:
                refs = fields["references"]
                try:
                    ObserverState.for_average_tracking(refs.r, refs.f, alpha, beta)
                except ValueError as e:
                    raise doc.error(("initial", "alpha"), str(e)) from None
            fields["initial_observer"] = ObserverState(alpha, beta)

    try:
        return Scenario(
            name=str(doc.lookup(("name",)) or os.path.splitext(os.path.basename(doc.source or "scenario"))[0]),
            mode=mode,
            rho=rho,
            schedule=schedule,
            sim=sim,
            boundary_layer=boundary_layer,
            description=str(doc.lookup(("description",)) or ""),
            **fields,
        )
    except ValueError as e:
        raise doc.error(("timing",), str(e)) from None


def parse_scenario(text: str, source: Optional[str] = None,
                   defaults: Optional[Dict[str, Any]] = None) -> Scenario:
    """Parse scenario YAML text; source names the file in error messages."""
    return scenario_from_document(_parse_document(text, source), defaults)


def load_scenario(path: str, defaults: Optional[Dict[str, Any]] = None) -> Scenario:
    """
    Load a scenario file.

    Raises:
        ScenarioFileError: If the file is missing, malformed or inconsistent
    """
    try:
        with open(path, 'r') as f:
            text = f.read()
    except OSError as e:
        raise ScenarioFileError(f"Cannot read scenario file: {e.strerror}", path=path) from None
    logger.debug("Loaded scenario file %s", path)
    return parse_scenario(text, source=path, defaults=defaults)


def _floats(values) -> List[float]:
    return [float(x) for x in values]


def _signals(signals: Sequence[Signal]) -> List[Dict[str, Any]]:
    return [s.to_dict() for s in signals]


def scenario_to_dict(sc: Scenario) -> Dict[str, Any]:
    """Plain-data form of a scenario, the inverse of parsing."""
    base = sc.schedule.stage1.params
    stage_params = {"a1": sc.schedule.stage1.params, "a2": sc.schedule.stage2.params}
    gains: Dict[str, Any] = {"rho": float(sc.rho), "k": float(base.k), "delta": float(base.delta)}
    timing: Dict[str, Any] = {"t_a1": float(sc.schedule.t1), "t_a2": float(sc.schedule.t2)}
    data: Dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "name": sc.name,
        "description": sc.description,
        "mode": sc.mode.value,
    }
    signals: Dict[str, Any] = {}
    initial: Dict[str, Any] = {}

    if sc.mode == TrackingMode.SMC:
        data["plant"] = {"z1": float(sc.plant.z1), "z2": float(sc.plant.z2)}
        signals["disturbance"] = sc.plant.disturbance.to_dict()
        signals["disturbance_bound"] = float(sc.plant.disturbance_bound)
    else:
        obs = sc.observer
        gains.update(b1=float(obs.b1), b2=float(obs.b2), c1=float(obs.c1), c2=float(obs.c2))
        stage_params.update(b1=obs.schedule.stage1.params, b2=obs.schedule.stage2.params)
        timing.update(t_b1=float(obs.schedule.t1), t_b2=float(obs.schedule.t2), T_c=float(sc.t_c))
        topo = sc.topology
        data["topology"] = {
            "n": topo.n,
            "directed": topo.directed,
            "edges": [[i, j, w] for i, j, w in topo.edges()],
            "leader_links": _floats(topo.leader_links),
        }
        followers = sc.followers
        signals["d"] = _signals(followers.disturbances)
        signals["d_max"] = float(followers.d_max)
        if sc.d_bar is not None:
            signals["d_bar"] = float(sc.d_bar)
        if followers.seed is not None:
            initial["random"] = {"low": float(followers.init_range[0]), "high": float(followers.init_range[1])}
        else:
            initial["x"] = _floats(followers.x)
            initial["v"] = _floats(followers.v)
        if sc.mode == TrackingMode.DAT:
            refs = sc.references
            signals["a_r"] = _signals(refs.accelerations)
            signals["a_max"] = float(refs.a_max)
            initial["r"] = _floats(refs.r)
            initial["f"] = _floats(refs.f)
        else:
            signals["u0"] = sc.leader.u0.to_dict()
            signals["u_max"] = float(sc.leader.u_max)
            initial["leader"] = {"x0": float(sc.leader.x0), "v0": float(sc.leader.v0)}
        if sc.initial_observer is not None:
            initial["alpha"] = _floats(sc.initial_observer.alpha)
            initial["beta"] = _floats(sc.initial_observer.beta)

    overrides = {
        name: {"k": float(p.k), "delta": float(p.delta)}
        for name, p in stage_params.items() if p != base
    }
    if overrides:
        gains["stages"] = overrides
    if sc.boundary_layer is not None:
        gains["boundary_layer"] = float(sc.boundary_layer)
    data["gains"] = gains
    data["timing"] = timing
    if signals:
        data["signals"] = signals
    if initial:
        data["initial"] = initial
    data["sim"] = {
        "dt": float(sc.sim.dt),
        "horizon": float(sc.sim.horizon),
        "seed": int(sc.sim.seed),
        "integrator": sc.sim.integrator.value,
        "decimation": int(sc.sim.decimation),
    }
    return data


def dump_scenario(sc: Scenario) -> str:
    return yaml.safe_dump(scenario_to_dict(sc), sort_keys=False, default_flow_style=None)


def save_scenario(sc: Scenario, path: str) -> str:
    """Write a scenario file and return its path."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w') as f:
        f.write(dump_scenario(sc))
    return path
