"""
Built-in numerical examples.

Gains, stage durations and signals are the standard demonstration values. Each
example ships a small representative topology satisfying the mode's assumptions:

    1  single plant, no graph
    2  leader -> agent 1, followers on an undirected ring of 4
    3  directed chain leader -> 1 -> 2 -> 3 -> 4
    4  undirected 4-cycle, no leader
"""

from typing import Callable, Dict, Optional

from .engine import SimConfig
from .generator import GainParams, StagedGain
from .observers import ObserverGains
from .scenarios import FollowerSpec, LeaderSpec, PlantSpec, ReferenceSpec
from .signals import Signal
from .simulation import Scenario
from .topology import Topology, TrackingMode

PARAMS = GainParams(k=2.0, delta=0.01)

RING_4 = [(1, 2), (2, 3), (3, 4), (4, 1)]
# (i, j): i receives from j
CHAIN_4 = [(2, 1), (3, 2), (4, 3)]


def example_1(seed: int = 0) -> Scenario:
    """Single plant from (200, 100) under a sin(t) disturbance; T_a = 6 s."""
    return Scenario(
        name="example-1",
        description="Fixed-time sliding-mode control of a disturbed double integrator",
        mode=TrackingMode.SMC,
        rho=2.0,
        schedule=StagedGain.polynomial(3.0, 3.0, PARAMS),
        sim=SimConfig(dt=1e-4, horizon=8.0, seed=seed),
        plant=PlantSpec(200.0, 100.0, Signal.sine(0.0, 1.0), 1.0),
    )


def example_2(seed: int = 0) -> Scenario:
    """Undirected consensus tracking, u0 = 1 + 5 sin t; T_c + T_a = 9 s."""
    return Scenario(
        name="example-2",
        description="Consensus tracking over an undirected graph",
        mode=TrackingMode.UNDIRECTED_CT,
        rho=8.0,
        schedule=StagedGain.polynomial(3.0, 3.0, PARAMS),
        sim=SimConfig(dt=1e-4, horizon=12.0, seed=seed),
        topology=Topology.from_edges(4, RING_4, leader_links=[1.0, 0.0, 0.0, 0.0]),
        observer=ObserverGains(4.0, 1.0, 4.0, 8.0, StagedGain.polynomial(1.5, 1.5, PARAMS)),
        leader=LeaderSpec(0.0, 0.0, Signal.sine(1.0, 5.0), 6.0),
        followers=FollowerSpec.random(4, seed),
    )


def example_3(seed: int = 0) -> Scenario:
    """
    Directed consensus tracking, u0 = 2 + 18 sin t; T_c + T_a = 6 s.

    c2 = 34 is below the conservative directed bound p_max (d_bar + u_max) / lambda1(Q)
    for this chain; validation reports it and the example still runs.
    """
    return Scenario(
        name="example-3",
        description="Consensus tracking over a leader-rooted directed chain",
        mode=TrackingMode.DIRECTED_CT,
        rho=21.0,
        schedule=StagedGain.polynomial(2.0, 2.0, PARAMS),
        sim=SimConfig(dt=1e-4, horizon=8.0, seed=seed),
        topology=Topology.from_edges(4, CHAIN_4, leader_links=[1.0, 0.0, 0.0, 0.0], directed=True),
        observer=ObserverGains(2.0, 7.0, 2.0, 34.0, StagedGain.polynomial(1.0, 1.0, PARAMS)),
        leader=LeaderSpec(0.0, 0.0, Signal.sine(2.0, 18.0), 20.0),
        followers=FollowerSpec.random(4, seed),
    )


def example_4(seed: int = 0) -> Scenario:
    """Average tracking of four references with a_i = c_i + A_i sin 5t; T_c + T_a = 12 s."""
    accelerations = (
        Signal.sine(41.0, 20.0, 5.0),
        Signal.sine(51.0, 10.0, 5.0),
        Signal.sine(30.0, 30.0, 5.0),
        Signal.sine(40.0, 20.0, 5.0),
    )
    return Scenario(
        name="example-4",
        description="Distributed average tracking over an undirected cycle",
        mode=TrackingMode.DAT,
        rho=63.0,
        schedule=StagedGain.polynomial(4.0, 4.0, PARAMS),
        sim=SimConfig(dt=1e-4, horizon=14.0, seed=seed),
        topology=Topology.from_edges(4, RING_4),
        observer=ObserverGains(0.25, 1.0, 0.25, 123.0, StagedGain.polynomial(2.0, 2.0, PARAMS)),
        references=ReferenceSpec([-6.0, -2.0, 2.0, 6.0], [1.0, -1.0, 2.0, -2.0], accelerations, 61.0),
        followers=FollowerSpec.random(4, seed),
    )


EXAMPLES: Dict[int, Callable[[int], Scenario]] = {
    1: example_1,
    2: example_2,
    3: example_3,
    4: example_4,
}


def builtin_scenario(example_id: int, seed: int = 0, dt: Optional[float] = None) -> Scenario:
    """
    Built-in example by number.

    Raises:
        ValueError: If the example does not exist
    """
    try:
        builder = EXAMPLES[int(example_id)]
    except (KeyError, TypeError, ValueError):
        raise ValueError(f"Unknown example {example_id!r}; choose one of {sorted(EXAMPLES)}") from None
    scenario = builder(seed)
    return scenario if dt is None else scenario.with_overrides(dt=dt)
