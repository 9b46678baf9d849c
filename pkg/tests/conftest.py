"""Shared fixtures: small topologies, scenario texts and the built-in example runs."""

import textwrap

import numpy as np
import pytest

from fxtrack import (
    GainParams,
    ObserverGains,
    StagedGain,
    Topology,
    builtin_scenario,
    run_scenario,
)


def faddeev_leverrier(M):
    """Characteristic polynomial coefficients of M, highest power first."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    coeffs = [1.0]
    Mk = np.zeros_like(M)
    for k in range(1, n + 1):
        Mk = M @ Mk + coeffs[-1] * np.eye(n)
        coeffs.append(-np.trace(M @ Mk) / k)
    return np.array(coeffs)


@pytest.fixture
def chain_2():
    """Directed chain leader -> 1 -> 2."""
    return Topology.from_edges(2, [(2, 1)], leader_links=[1.0, 0.0], directed=True)


@pytest.fixture
def path_3():
    return Topology.from_edges(3, [(1, 2), (2, 3)])


@pytest.fixture
def observer_gains():
    return ObserverGains(1.0, 1.0, 1.0, 1.0, StagedGain.polynomial(1.0, 1.0, GainParams()))


# One integration per example for the whole session.
@pytest.fixture(scope="session")
def example_1_result():
    return run_scenario(builtin_scenario(1))


@pytest.fixture(scope="session")
def example_2_result():
    return run_scenario(builtin_scenario(2))


@pytest.fixture(scope="session")
def example_3_result():
    return run_scenario(builtin_scenario(3))


@pytest.fixture(scope="session")
def example_4_result():
    return run_scenario(builtin_scenario(4))


SMC_SCENARIO = textwrap.dedent("""\
    schema_version: 1
    name: short-smc
    mode: smc
    gains:
      rho: 2.0
    timing:
      t_a1: 1.0
      t_a2: 1.0
    plant:
      z1: 1.0
      z2: 0.0
    sim:
      dt: 1.0e-4
      horizon: 2.5
""")

UNDIRECTED_SCENARIO = textwrap.dedent("""\
    schema_version: 1
    name: pair
    mode: undirected_ct
    topology:
      n: 2
      edges: [[1, 2]]
      leader_links: [1, 0]
    gains:
      rho: 4.0
      b1: 2.0
      b2: 1.0
      c1: 2.0
      c2: {c2}
    timing:
      t_a1: 0.5
      t_a2: 0.5
      t_b1: 0.25
      t_b2: 0.25
    signals:
      u0: 1.0
      u_max: 1.0
      d_max: 1.0
    initial:
      leader: {{x0: 0.0, v0: 0.0}}
      x: [1.0, -1.0]
      v: [0.5, 0.0]
    sim:
      dt: 1.0e-3
      horizon: 1.5
""")

# Explicit Euler with b1 = c1 = 1000 at dt = 1e-2 is unstable on this chain.
DIVERGING_SCENARIO = textwrap.dedent("""\
    schema_version: 1
    name: stiff-chain
    mode: directed_ct
    topology:
      n: 2
      edges: [[2, 1]]
      leader_links: [1, 0]
    gains:
      rho: 4.0
      b1: 1000.0
      b2: 3.0
      c1: 1000.0
      c2: 8.0
    timing:
      t_a1: 0.5
      t_a2: 0.5
      t_b1: 0.5
      t_b2: 0.5
    signals:
      u0: 1.0
      u_max: 1.0
      d_max: 1.0
    initial:
      leader: {x0: 0.0, v0: 0.0}
      x: [1.0, -1.0]
      v: [0.5, 0.0]
    sim:
      dt: 1.0e-2
      horizon: 4.0
""")


@pytest.fixture
def smc_file(tmp_path):
    path = tmp_path / "short_smc.yaml"
    path.write_text(SMC_SCENARIO)
    return str(path)


@pytest.fixture
def undirected_text():
    """Two-follower undirected scenario; format with c2."""
    return UNDIRECTED_SCENARIO
