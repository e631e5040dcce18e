"""AEL distance amplification over GF(3) and GF(5): decode, recover, audit."""

from expcodes.ael import AELCode, OuterCode, ael_distance_bound, list_decode_ael, list_recover_ael
from expcodes.expander import complete_bipartite
from expcodes.gf_linear import Field, min_distance, random_linear_code
from expcodes.oracle import AuditConfig, ChannelSpec, global_list_oracle, lemma_audit, plant

# inner [8,2] code over GF(3) at every vertex of K_8,8; outer [16,4] code folded into 8 symbols
F = Field(3)
inner = random_linear_code(F, 8, 2, 15)
outer = OuterCode(random_linear_code(F, 16, 4, 0), 2)
A = AELCode(complete_bipartite(8), inner, outer)
print("inner distance:", min_distance(inner), "outer symbol distance:", outer.delta)
print("distance bound at lambda=0:", ael_distance_bound(A.delta_in, outer.delta, 0.0))

# list decoding in the right-block metric
beta, eps = 0.125, 0.125
for seed in range(3):
    inst = plant(A, ChannelSpec("block", beta=beta), seed)
    res = list_decode_ael(A, inst.received, beta, eps, family_mode="partition")
    truth = global_list_oracle(A, inst.received, beta, metric="right")
    print(f"decode seed {seed}: list {len(res)}, oracle {len(truth)}, best effort {res.best_effort}")

# list recovery: every right vertex offers two candidate blocks
F5 = Field(5)
B = AELCode(complete_bipartite(8), random_linear_code(F5, 8, 2, 9), OuterCode(random_linear_code(F5, 16, 4, 0), 2))
inst = plant(B, ChannelSpec("recovery", beta=0.125, k=2, planted=2), 0)
# the exhaustive worst-case list size is too costly here, so the observed local list sizes are used
res = list_recover_ael(B, inst.received, 0.125, 0.125, family_mode="partition", K="observed")
print("recovery list size:", len(res), "planted found:", inst.h.tobytes() in res.as_set())

# the rigidity audit measures how much slack the lemma leaves on this instance
rep = lemma_audit(plant(A, ChannelSpec("block", beta=0.25), 0), "lem:ael-rigidity", AuditConfig(eps=0.125, K="observed"))
print("rigidity audit:", rep.status, "slack", round(rep.slack, 4))
