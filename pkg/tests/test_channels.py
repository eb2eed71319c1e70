import numpy as np
import pytest

from qnetbounds.channels import (GOLDEN_BREAK, ChannelError, ChannelMeasures, ad_lower_closed,
                                 binary_entropy, choi, closed_form_measures, custom_channel,
                                 make_channel, max_entangled)
from qnetbounds.linalg import eigvalsh, partial_trace

NAMED = ("amplitude_damping", "dephasing", "erasure", "depolarizing")


@pytest.mark.parametrize("kind", NAMED)
@pytest.mark.parametrize("p", [0.0, 0.3, 1.0])
def test_choi_state_is_a_state(kind, p):
    ch = make_channel(kind, p)
    pi = choi(ch)
    assert np.trace(pi.matrix).real == pytest.approx(1.0)
    assert eigvalsh(pi.matrix)[0] > -1e-12
    np.testing.assert_allclose(partial_trace(pi), np.eye(2) / 2, atol=1e-14)


@pytest.mark.parametrize("kind", NAMED)
def test_zero_parameter_is_identity(kind):
    ch = make_channel(kind, 0.0)
    rho = np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]])
    out = ch.apply(rho)
    np.testing.assert_allclose(out[:2, :2], rho, atol=1e-14)


def test_channel_actions():
    rho = np.array([[0.25, 0.4], [0.4, 0.75]])
    ad = make_channel("amplitude_damping", 0.4).apply(rho)
    np.testing.assert_allclose(ad, [[0.25 + 0.4 * 0.75, 0.4 * np.sqrt(0.6)],
                                    [0.4 * np.sqrt(0.6), 0.6 * 0.75]])
    deph = make_channel("dephasing", 0.5).apply(rho)
    np.testing.assert_allclose(deph, [[0.25, 0.2], [0.2, 0.75]])
    dep = make_channel("depolarizing", 1.0).apply(rho)
    np.testing.assert_allclose(dep, np.eye(2) / 2)
    er = make_channel("erasure", 1.0).apply(rho)
    np.testing.assert_allclose(er, np.diag([0, 0, 1.0]))
    assert make_channel("erasure", 0.2).dim_out == 3


def test_bad_channels():
    with pytest.raises(ChannelError):
        make_channel("dephasing", 1.5)
    with pytest.raises(ChannelError):
        make_channel("teleport", 0.1)
    with pytest.raises(ChannelError):
        make_channel("custom", 0.1)
    with pytest.raises(ChannelError):
        custom_channel([np.eye(2) * 0.5], False)
    with pytest.raises(ChannelError):
        custom_channel([], True)


def test_custom_channel_and_key():
    ch = custom_channel([np.eye(2)], True)
    assert ch.kind == "custom" and ch.choi_simulable
    np.testing.assert_allclose(choi(ch).matrix, max_entangled(2))
    assert make_channel("dephasing", 0.1 + 1e-15).key == make_channel("dephasing", 0.1).key


def test_binary_entropy():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == binary_entropy(1.0) == 0.0
    assert binary_entropy(0.11) == pytest.approx(0.4999157, abs=1e-6)
    with pytest.raises(ValueError):
        binary_entropy(1.2)


def test_closed_form_values():
    deph = closed_form_measures("dephasing", 0.5)
    assert deph.e_r == pytest.approx(0.188722, abs=1e-6)
    assert deph.e_sq_ub == pytest.approx(0.3545789, abs=1e-7)
    assert deph.e_max is None and deph.choi_simulable
    assert closed_form_measures("dephasing", 0.0).e_r == 1.0
    ad = closed_form_measures("amplitude_damping", 0.5)
    assert ad.e_max == pytest.approx(0.584963, abs=1e-6)
    assert closed_form_measures("amplitude_damping", 1.0).e_sq_ub == pytest.approx(0.0, abs=1e-15)
    er = closed_form_measures("erasure", 0.25)
    assert er.e_r == er.e_sq_ub == 0.75
    dep = closed_form_measures("depolarizing", 0.9)
    assert dep.e_r == 0.0 and dep.e_sq_ub is None
    assert closed_form_measures("depolarizing", 0.0).e_r == pytest.approx(1.0)
    with pytest.raises(ChannelError):
        closed_form_measures("custom", 0.1)


def test_measures_ordering_enforced():
    with pytest.raises(ValueError):
        ChannelMeasures(e_r=1.0, e_max=0.5)


def test_ad_lower_branches():
    assert ad_lower_closed(0.0) == pytest.approx(1.0)
    assert ad_lower_closed(0.3) == pytest.approx(0.754169, abs=1e-6)
    assert ad_lower_closed(0.8) == pytest.approx(0.169925, abs=1e-6)
    # continuous at the branch point
    below = ad_lower_closed(GOLDEN_BREAK - 1e-12)
    above = ad_lower_closed(GOLDEN_BREAK + 1e-12)
    assert below == pytest.approx(above, abs=1e-9)
