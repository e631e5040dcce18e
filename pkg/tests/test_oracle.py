import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from expcodes.ael import AELCode, OuterCode, ael_codewords
from expcodes.expander import random_biregular
from expcodes.gf_linear import LinearCode, brute_force_list_decode, enumerate_codewords, random_linear_code
from expcodes.oracle import (
    LEMMA_IDS,
    AuditConfig,
    ChannelSpec,
    OracleTooLarge,
    global_list_oracle,
    lemma_audit,
    plant,
)
from expcodes.tanner import tanner_membership
from instances import GF3, TETRACODE, ael_gf3, ael_gf5, as_set, parity_tensor, tetracode_tanner


def tensor_codewords():
    words = []
    for bits in itertools.product((0, 1), repeat=9):
        m = np.array(bits).reshape(3, 3)
        if not (m.sum(axis=0) % 2).any() and not (m.sum(axis=1) % 2).any():
            words.append(np.array(bits))
    return words


# global list oracle


def test_oracle_radius_one_is_whole_code():
    assert len(global_list_oracle(parity_tensor(), np.zeros(9, dtype=int), 1.0)) == 16
    A = ael_gf3()
    assert len(global_list_oracle(A, ael_codewords(A)[0], 1.0, metric="right")) == 81


def test_oracle_radius_zero_on_a_codeword_is_a_singleton():
    T = tetracode_tanner()
    h = plant(T, ChannelSpec("edge"), 2).h
    assert as_set(global_list_oracle(T, h, 0.0)) == as_set([h])


@pytest.mark.parametrize("seed", range(10))
def test_tensor_oracle_matches_hand_filter(seed):
    g = np.random.default_rng(seed).integers(0, 2, 9)
    expected = [w for w in tensor_codewords() if np.count_nonzero(w != g) <= 3]
    assert as_set(global_list_oracle(parity_tensor(), g, 3 / 9)) == as_set(expected)


@given(st.integers(0, 10_000), st.sampled_from([0.0, 0.25, 0.5]))
def test_oracle_agrees_with_library_list_decoder(seed, radius):
    code = random_linear_code(GF3, 6, 2, seed % 50)
    g = np.random.default_rng(seed).integers(0, 3, 6)
    ours = global_list_oracle(code, g, radius)
    lib = brute_force_list_decode(code, g, radius).entries
    assert as_set(ours) == as_set(lib)


def test_oracle_hamming_metric_on_ael_counts_edges():
    A = ael_gf3()
    w = ael_codewords(A)[4]
    g = w.copy()
    g[0, :3] = (g[0, :3] + 1) % 3
    assert as_set(global_list_oracle(A, g, 3 / 64)) == as_set([w])
    assert global_list_oracle(A, g, 2 / 64) == []


def test_oracle_input_errors():
    with pytest.raises(ValueError):
        global_list_oracle(parity_tensor(), np.zeros(9, dtype=int), 0.1, metric="lee")
    with pytest.raises(ValueError):
        global_list_oracle(parity_tensor(), np.zeros(9, dtype=int), 0.1, metric="right")
    with pytest.raises(TypeError):
        global_list_oracle("code", np.zeros(3), 0.1)
    with pytest.raises(OracleTooLarge):
        global_list_oracle(random_linear_code(GF3, 12, 8, 0), np.zeros(12, dtype=int), 0.1, cap=1000)


def test_oracle_words_are_codewords():
    T = tetracode_tanner()
    words = global_list_oracle(T, np.zeros(16, dtype=int), 1.0)
    assert len(words) == 81 and all(tanner_membership(T, w) for w in words)
    code = LinearCode.from_generator(GF3, TETRACODE)
    assert as_set(global_list_oracle(code, np.zeros(4, dtype=int), 1.0)) == as_set(enumerate_codewords(code))


# planting


def test_plant_zero_noise_is_the_codeword():
    T = tetracode_tanner()
    inst = plant(T, ChannelSpec("edge"), 0)
    assert np.array_equal(inst.received, inst.h) and tanner_membership(T, inst.h)
    A = ael_gf3()
    inst = plant(A, ChannelSpec("block"), 0)
    assert np.array_equal(inst.received, inst.h)


def test_plant_full_block_noise_changes_every_block():
    A = ael_gf3()
    inst = plant(A, ChannelSpec("block", beta=1.0), 3)
    assert np.any(inst.received != inst.h, axis=1).all()


@given(st.integers(0, 10_000), st.sampled_from([0.0, 0.1, 0.25, 0.5]))
def test_plant_edge_noise_count_is_exact(seed, beta):
    T = tetracode_tanner()
    inst = plant(T, ChannelSpec("edge", beta=beta), seed)
    assert np.count_nonzero(inst.received != inst.h) == math.floor(beta * 16)


@given(st.integers(0, 10_000), st.sampled_from([0.0, 0.25, 0.5]), st.sampled_from([1, 2, 3]))
def test_plant_recovery_hit_count_is_exact(seed, beta, k):
    A = ael_gf3()
    inst = plant(A, ChannelSpec("recovery", beta=beta, k=k), seed)
    assert inst.received.k == k
    assert A.n - inst.received.misses(inst.h) == math.ceil((1 - beta) * A.n)


def test_plant_is_reproducible():
    A = ael_gf3()
    for spec in (ChannelSpec("block", beta=0.25), ChannelSpec("recovery", beta=0.25, k=2)):
        a, b = plant(A, spec, 11), plant(A, spec, 11)
        assert np.array_equal(a.h, b.h)
        ra = a.received.blocks if spec.kind == "recovery" else a.received
        rb = b.received.blocks if spec.kind == "recovery" else b.received
        assert np.array_equal(ra, rb)


def test_plant_erasure_channel_counts():
    T = tetracode_tanner()
    inst = plant(T, ChannelSpec("erasure", beta=0.25, erasure=0.5), 1)
    assert inst.received.erasure_fraction == 0.5
    assert inst.received.errors_against(T, inst.h) == 0.25


def test_channel_spec_validation():
    with pytest.raises(ValueError):
        ChannelSpec("burst")
    with pytest.raises(ValueError):
        ChannelSpec("erasure", beta=0.6, erasure=0.6)
    with pytest.raises(ValueError):
        ChannelSpec("recovery", k=2, planted=3)
    with pytest.raises(ValueError):
        plant(ael_gf3(), ChannelSpec("edge"), 0)
    with pytest.raises(ValueError):
        plant(tetracode_tanner(), ChannelSpec("block"), 0)


# lemma audits

AEL_CFG = AuditConfig(eps=0.125, K="observed")
LR_CFG = AuditConfig(eps=0.125, K="observed")
TANNER_CFG = AuditConfig(eps=1 / 32, dec1=0.25, dec2=0.25)


@pytest.mark.parametrize("lemma", ["clm:local-membership", "lem:ael-rigidity"])
@pytest.mark.parametrize("seed", range(3))
def test_ael_audits_pass_on_complete_graph(lemma, seed):
    inst = plant(ael_gf3(), ChannelSpec("block", beta=0.25), seed)
    rep = lemma_audit(inst, lemma, AEL_CFG)
    assert rep.status == "pass" and rep.slack >= 0


@pytest.mark.parametrize("lemma", ["clm:local-membership-lr", "lem:ael-rigidity-lr"])
def test_recovery_audits_pass_on_complete_graph(lemma):
    inst = plant(ael_gf5(), ChannelSpec("recovery", beta=0.125, k=2, planted=2), 0)
    rep = lemma_audit(inst, lemma, LR_CFG)
    assert rep.status == "pass" and rep.slack >= 0


@pytest.mark.parametrize("lemma", ["prop:local_presence", "lem:tanner-rigidity"])
@pytest.mark.parametrize("seed", range(3))
def test_tanner_audits_pass_on_complete_graph(lemma, seed):
    inst = plant(tetracode_tanner(), ChannelSpec("edge", beta=0.125), seed)
    rep = lemma_audit(inst, lemma, TANNER_CFG)
    assert rep.status == "pass" and rep.slack >= 0


def test_rigidity_audit_examines_the_planted_placement():
    inst = plant(ael_gf3(), ChannelSpec("block", beta=0.25), 0)
    rep = lemma_audit(inst, "lem:ael-rigidity", AEL_CFG)
    assert rep.details["examined"] >= 1 and not rep.details["truncated"]


def test_overstated_lambda_reports_precondition_unmet():
    inst = plant(ael_gf3(), ChannelSpec("block", beta=0.25), 0)
    rep = lemma_audit(inst, "clm:local-membership", AuditConfig(eps=0.125, K="observed", lam=0.9))
    assert rep.status == "precondition unmet"
    assert rep.preconditions["lambda<=gamma*eps"] is False


def test_distance_beyond_beta_reports_precondition_unmet():
    inst = plant(ael_gf3(), ChannelSpec("block", beta=0.5), 0)
    rep = lemma_audit(inst, "clm:local-membership", AuditConfig(eps=0.125, beta=0.25, K="observed"))
    assert rep.status == "precondition unmet" and not rep.preconditions["distance<=beta"]


def test_rigidity_slack_on_a_seeded_sparse_instance():
    # λ ≈ 0.78 here, so the lemma is not owed; the audit reports and still measures slack
    A = AELCode(
        random_biregular(16, 4, 0),
        LinearCode.from_generator(GF3, TETRACODE),
        OuterCode(random_linear_code(GF3, 32, 4, 0), 2),
    )
    for seed in range(3):
        inst = plant(A, ChannelSpec("block", beta=float(A.delta_in) - 0.25), seed)
        rep = lemma_audit(inst, "lem:ael-rigidity", AEL_CFG)
        assert rep.status == "precondition unmet"
        assert rep.slack >= 0


def test_audit_rejects_unknown_lemma_and_wrong_instance():
    inst = plant(ael_gf3(), ChannelSpec("block"), 0)
    with pytest.raises(ValueError, match="unknown lemma"):
        lemma_audit(inst, "lem:nope")
    with pytest.raises(ValueError):
        lemma_audit(inst, "lem:tanner-rigidity")
    assert len(LEMMA_IDS) == 6
