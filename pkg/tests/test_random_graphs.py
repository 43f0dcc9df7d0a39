import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coopnet.families import FamilySpec, generate
from coopnet.graph import is_connected, modularity
from coopnet.random_graphs import (GenerationError, RngSeed, erdos_renyi, generate_model,
                                   parse_model, preferential_attachment, rewire, sbm, stream)


def test_streams_are_reproducible_and_independent():
    a = stream(5, task=0).random(4)
    assert np.array_equal(a, stream(RngSeed(5, 0)).random(4))
    assert not np.array_equal(a, stream(5, task=1).random(4))
    g = np.random.default_rng(0)
    assert stream(g) is g
    with pytest.raises(ValueError):
        RngSeed(-1)


def test_er_reproducible_and_density():
    g = erdos_renyi(200, 0.1, seed=3)
    assert g.edges() == erdos_renyi(200, 0.1, seed=3).edges()
    assert g.edges() != erdos_renyi(200, 0.1, seed=4).edges()
    pairs = 200 * 199 / 2
    # binomial edge count within 4 standard deviations
    assert abs(g.edge_count - 0.1 * pairs) < 4 * math.sqrt(pairs * 0.1 * 0.9)


def test_er_connected_and_cap():
    assert is_connected(erdos_renyi(30, 0.15, seed=1, require_connected=True))
    with pytest.raises(GenerationError):
        erdos_renyi(5, 0.0, seed=0, require_connected=True)
    with pytest.raises(ValueError):
        erdos_renyi(5, 1.5)


def test_sbm_blocks():
    g, part = sbm([30, 20], 1.0, 0.0, seed=0)
    assert part.community_id == (0,) * 30 + (1,) * 20
    assert g.edge_count == 30 * 29 // 2 + 20 * 19 // 2
    # disjoint cliques: Q = 1 - sum (d_c / 2m)^2 with d = 870, 380 and m = 625
    assert modularity(g, part) == pytest.approx(1 - (870 / 1250) ** 2 - (380 / 1250) ** 2)
    g2, _ = sbm([30, 20], 0.5, 0.05, seed=9)
    assert g2.edges() == sbm([30, 20], 0.5, 0.05, seed=9)[0].edges()


def test_preferential_attachment_edge_count():
    g = preferential_attachment(100, 2, seed=1)
    assert g.edge_count == 197
    assert is_connected(g)
    assert min(g.degree) >= 2
    h = preferential_attachment(300, 3, attractiveness=5.0, seed=2)
    assert h.edge_count == 6 + 3 * 296
    with pytest.raises(ValueError):
        preferential_attachment(3, 3)


def test_pa_hubs_emerge():
    g = preferential_attachment(2000, 1, seed=0)
    assert max(g.degree) > 10 * g.mean_degree


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.floats(0.0, 0.5))
def test_rewire_preserves_edge_count_and_connectivity(seed, p):
    g = generate(FamilySpec.parse("star_of_cliques:m=3,n=4"))
    h = rewire(g, p, seed=seed)
    assert h.edge_count == g.edge_count
    assert h.node_count == g.node_count
    assert is_connected(h)


def test_rewire_edge_cases():
    g = generate(FamilySpec.parse("clique:n=5"))
    assert rewire(g, 0.9, seed=1) is g
    s = generate(FamilySpec.parse("ring_of_cliques:L=3,n=4"))
    assert rewire(s, 0.0, seed=1) is s
    assert rewire(s, 0.3, seed=1).edges() == rewire(s, 0.3, seed=1).edges()


def test_model_strings():
    assert parse_model("er:n=40,p=0.3,seed=7") == ("er", {"n": 40, "p": 0.3, "seed": 7})
    assert generate_model("er:n=40,p=0.3,seed=7").edges() == erdos_renyi(40, 0.3, seed=7).edges()
    assert generate_model("pa:n=50,m=2,a=0,seed=1").edge_count == 97
    assert generate_model("sbm:n1=10,n2=12,p_in=0.5,p_out=0.1,seed=2").node_count == 22
    with pytest.raises(ValueError):
        parse_model("er:n=4,p")
