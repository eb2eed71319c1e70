import json
import math

import numpy as np
import pytest

from qnetbounds.channels import custom_channel, make_channel
from qnetbounds.checks import random_network
from qnetbounds.network import (ContinuityProfile, Cut, CutBound, Edge, MissingMeasure,
                                NetworkError, NetworkGraph, TooLarge, cut_bound, cut_edges,
                                cut_entanglement, ebit_upper_bound, edge_weights, load_network,
                                min_cut, mu_dephasing_family, mu_from_sums, mu_tilde,
                                network_from_dict, strong_converse_error)

DEPH = make_channel("dephasing", 0.5)
AD = make_channel("amplitude_damping", 0.5)
E_R_DEPH = 0.18872187554086717
E_MAX_AD = math.log2(1.5)


def chain(m1=2.0, m2=1.0):
    return NetworkGraph(("A", "C1", "B"), (Edge("A", "C1", DEPH, m1), Edge("C1", "B", AD, m2)))


def test_cut_edges_on_chain():
    g = chain()
    assert cut_edges(g, Cut()) == (0,)
    assert cut_edges(g, Cut({"C1"})) == (1,)
    with pytest.raises(NetworkError):
        cut_edges(g, Cut({"C7"}))
    with pytest.raises(NetworkError):
        Cut({"A"})


def test_cut_edges_both_directions():
    g = NetworkGraph(("A", "C1", "C2", "B"), (
        Edge("A", "C1", DEPH), Edge("C2", "C1", DEPH), Edge("C1", "C2", AD),
        Edge("C2", "B", AD), Edge("B", "A", AD)))
    assert cut_edges(g, Cut({"C1"})) == (1, 2, 4)
    assert cut_edges(g, Cut({"C1", "C2"})) == (3, 4)


def test_cut_entanglement_examples():
    g = NetworkGraph(("A", "B"), (Edge("A", "B", DEPH, 2.0),))
    assert cut_entanglement(g, Cut()) == pytest.approx(0.377444, abs=1e-6)
    g2 = NetworkGraph(("A", "B"), (Edge("A", "B", DEPH, 2.0), Edge("B", "A", AD, 1.0)))
    assert cut_entanglement(g2, Cut()) == pytest.approx(0.962407, abs=1e-6)
    g0 = NetworkGraph(("A", "B"), (Edge("A", "B", DEPH, 0.0), Edge("A", "B", AD, 0.0)))
    assert cut_entanglement(g0, Cut()) == 0.0


def test_single_measure_policy_and_missing():
    g = NetworkGraph(("A", "B"), (Edge("A", "B", AD, 1.0),))
    assert cut_entanglement(g, Cut(), "e_max") == pytest.approx(E_MAX_AD)
    with pytest.raises(MissingMeasure, match="edge 0"):
        cut_entanglement(g, Cut(), "e_r")
    dep = NetworkGraph(("A", "B"), (Edge("A", "B", make_channel("depolarizing", 0.2)),))
    with pytest.raises(MissingMeasure):
        mu_tilde(dep, Cut())
    with pytest.raises(ValueError):
        cut_entanglement(g, Cut(), "negativity")


def test_overrides_take_precedence():
    g = NetworkGraph(("A", "B"), (Edge("A", "B", AD, 2.0, {"e_max": 0.25, "e_r": 0.1}),))
    assert cut_entanglement(g, Cut()) == 0.5
    assert cut_entanglement(g, Cut(), "e_r") == pytest.approx(0.2)
    with pytest.raises(NetworkError):
        Edge("A", "B", AD, 1.0, {"e_squashed": 1.0})
    with pytest.raises(NetworkError):
        Edge("A", "B", AD, -1.0)


def test_custom_edge_uses_sdp():
    ident = custom_channel([np.eye(2)], False)
    g = NetworkGraph(("A", "B"), (Edge("A", "B", ident, 1.0),))
    assert cut_entanglement(g, Cut()) == pytest.approx(1.0, abs=1e-6)
    simulable = custom_channel([np.eye(2)], True)
    g2 = NetworkGraph(("A", "B"), (Edge("A", "B", simulable, 1.0),))
    with pytest.raises(MissingMeasure):
        cut_entanglement(g2, Cut())


def test_graph_validation():
    with pytest.raises(NetworkError):
        NetworkGraph(("A", "C"), ())
    with pytest.raises(NetworkError):
        NetworkGraph(("A", "B", "A"), ())
    with pytest.raises(NetworkError):
        NetworkGraph(("A", "B"), (Edge("A", "Z", AD),))


def test_continuity_profiles():
    er = ContinuityProfile.make("er_versatile", 0.1)
    assert er.f == pytest.approx(0.937991, abs=1e-6)
    assert er.g == pytest.approx(0.2)
    assert ebit_upper_bound(1.0, er) == pytest.approx(9.689956, abs=1e-6)
    em = ContinuityProfile.make("emax", 0.1)
    assert em.f == pytest.approx(0.148001, abs=1e-6)
    assert ebit_upper_bound(1.0, em) == pytest.approx(1.148001, abs=1e-6)
    for name in ("er_versatile", "emax"):
        assert ebit_upper_bound(0.962407, ContinuityProfile.make(name, 0.0)) == 0.962407
    assert ebit_upper_bound(1.0, ContinuityProfile.make("er_versatile", 0.125)) == math.inf
    with pytest.raises(ValueError):
        ContinuityProfile.make("emax", 1.0)
    with pytest.raises(ValueError):
        ContinuityProfile.make("e_sq", 0.1)


def test_ebit_bound_monotone():
    for name, top in (("er_versatile", 0.12), ("emax", 0.99)):
        eps = np.linspace(0, top, 30)
        vals = [ebit_upper_bound(0.7, ContinuityProfile.make(name, e)) for e in eps]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
        prof = ContinuityProfile.make(name, 0.05)
        assert ebit_upper_bound(0.8, prof) > ebit_upper_bound(0.7, prof)


def test_mu_examples():
    ident = NetworkGraph(("A", "B"), (Edge("A", "B", make_channel("dephasing", 0.0)),
                                      Edge("A", "B", make_channel("amplitude_damping", 0.0))))
    assert mu_tilde(ident, Cut()) == 0.0
    g = NetworkGraph(("A", "B"), (Edge("A", "B", DEPH), Edge("A", "B", make_channel("amplitude_damping", 1.0))))
    expect = (0.3545789 - E_R_DEPH) / (0.3545789 + E_R_DEPH)
    assert mu_tilde(g, Cut()) == pytest.approx(expect, abs=1e-6)
    assert mu_tilde(g, Cut()) == pytest.approx(0.305, abs=1e-3)
    assert mu_dephasing_family(1, 0.5, 1.0) == pytest.approx(mu_tilde(g, Cut()), abs=1e-12)
    assert mu_from_sums(0.0, 0.0) == 0.0
    assert mu_from_sums(0.4, 0.4) == 0.0
    assert mu_from_sums(0.3, 0.7) == -mu_from_sums(0.7, 0.3)


def test_mu_family_range_and_monotone_in_k():
    x, lam = np.meshgrid(np.linspace(0, 1, 21), np.linspace(0, 1, 21), indexing="ij")
    mus = np.stack([mu_dephasing_family(k, x, lam) for k in range(1, 8)])
    assert np.all(np.abs(mus) <= 1)
    gap_ok = (mu_dephasing_family(1, x, 1.0) >= 0)[None]  # E_sq(deph) >= E_R(deph)
    assert not np.any((np.diff(mus, axis=0) < -1e-12) & gap_ok)
    with pytest.raises(ValueError):
        mu_dephasing_family(1, 1.5, 0.5)


def test_min_cut_examples():
    single = NetworkGraph(("A", "B"), (Edge("A", "B", AD, 1.0, {"e_max": 1.5}),))
    best = min_cut(single)
    assert best.cut == Cut() and best.value == 1.5
    g = NetworkGraph(("A", "C1", "B"), (Edge("A", "C1", DEPH, 2.0), Edge("C1", "B", AD, 1.0)))
    for method in ("exhaustive", "maxflow", "auto"):
        res = min_cut(g, method=method)
        assert res.cut == Cut() and res.value == pytest.approx(0.377444, abs=1e-6)
    with pytest.raises(ValueError):
        min_cut(g, method="simplex")


def test_min_cut_details():
    res = min_cut(chain(), epsilon=0.1)
    assert isinstance(res, CutBound)
    assert res.e_versatile <= res.e_by_measure["e_max"] + 1e-9
    assert set(res.ebit_bound) == {("er_versatile", 0.1), ("emax", 0.1)}
    assert res.mu == pytest.approx(mu_tilde(chain(), res.cut))


def test_min_cut_below_every_explicit_cut():
    rng = np.random.default_rng(7)
    for _ in range(20):
        g = random_network(rng, max_inner=5, max_edges=12)
        best = min_cut(g, details=False).value
        inter = g.intermediate
        for mask in range(1 << len(inter)):
            cut = Cut(frozenset(n for i, n in enumerate(inter) if mask >> i & 1))
            assert best <= cut_entanglement(g, cut) + 1e-12


def test_versatile_below_emax_on_every_cut():
    g = NetworkGraph(("A", "C1", "B"), (
        Edge("A", "C1", make_channel("erasure", 0.3), 1.5), Edge("C1", "B", make_channel("depolarizing", 0.4)),
        Edge("A", "B", AD, 0.5)))
    for c_a in (set(), {"C1"}):
        b = cut_bound(g, Cut(c_a))
        assert b.e_versatile <= b.e_by_measure["e_max"] + 1e-9


def test_exhaustive_limits():
    nodes = ("A", "B") + tuple(f"C{i}" for i in range(29))
    g = NetworkGraph(nodes, (Edge("A", "B", AD),))
    with pytest.raises(TooLarge):
        min_cut(g, method="exhaustive")
    assert min_cut(g, method="auto", details=False).value == pytest.approx(E_MAX_AD)


def test_maxflow_needs_finite_weights():
    g = NetworkGraph(("A", "B"), (Edge("A", "B", AD, 1.0, {"e_max": math.inf}),))
    with pytest.raises(ValueError):
        min_cut(g, method="maxflow")
    assert edge_weights(g)[0] == math.inf


def test_strong_converse_examples():
    assert strong_converse_error(0.5, 10, 0.5, 1) == 0.0
    assert strong_converse_error(0.2, 10, 0.5, 1) == 0.0
    assert strong_converse_error(3.0, 2, 2.0, 2) == pytest.approx(0.5)
    assert strong_converse_error(1.1, 1e6, 1.0, 1) >= 1 - 1e-9
    with pytest.raises(ValueError):
        strong_converse_error(1.0, 0, 0.5, 1)
    with pytest.raises(ValueError):
        strong_converse_error(math.nan, 1, 0.5, 1)


NETWORK_DOC = {
    "epsilon": 0.05,
    "nodes": ["A", "C1", "B"],
    "edges": [
        {"from": "A", "to": "C1", "channel": {"kind": "dephasing", "param": 0.5}, "avg_uses": 2},
        {"from": "C1", "to": "B", "channel": {"kind": "amplitude_damping", "param": 0.5}, "avg_uses": 1,
         "overrides": {"e_sq_ub": 0.4}},
        {"from": "B", "to": "C1", "channel": {"kind": "custom", "param": 0,
                                              "kraus": [[[1, 0], [0, [0, 1]]]], "choi_simulable": False},
         "avg_uses": 0},
    ],
}


def test_load_network(tmp_path):
    path = tmp_path / "net.json"
    path.write_text(json.dumps(NETWORK_DOC), encoding="utf-8")
    g, eps = load_network(path)
    assert eps == 0.05 and g.nodes == ("A", "C1", "B")
    assert g.edges[1].overrides == {"e_sq_ub": 0.4}
    assert g.edges[2].channel.kraus[0][1, 1] == 1j
    assert min_cut(g).value == pytest.approx(2 * E_R_DEPH)


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(extra=1),
    lambda d: d.pop("epsilon"),
    lambda d: d["edges"][0].update(weight=1),
    lambda d: d["edges"][0]["channel"].update(kind="teleport"),
    lambda d: d["edges"][0]["channel"].update(colour="red"),
    lambda d: d["edges"][0]["channel"].update(kraus=[]),
    lambda d: d["edges"][0].update(avg_uses="two"),
    lambda d: d["edges"][0].update(to="C9"),
    lambda d: d["edges"][1]["overrides"].update(e_d=1.0),
    lambda d: d["edges"][0]["channel"].update(param=2.0),
    lambda d: d["edges"][2]["channel"].update(kraus=[[[0.5, 0], [0, 0.5]]]),
    lambda d: d.update(nodes="ACB"),
])
def test_bad_network_documents(mutate):
    doc = json.loads(json.dumps(NETWORK_DOC))
    mutate(doc)
    with pytest.raises(NetworkError):
        network_from_dict(doc)


def test_invalid_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{nope", encoding="utf-8")
    with pytest.raises(NetworkError):
        load_network(path)
