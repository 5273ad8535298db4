"""Method comparison at a fixed gradient budget.

Runs the six methods from the same initial point on the reference quartic
instance and tabulates the final objective error of the average iterate,
its gradient norm, and the consensus disagreement. The exact-convergence
variants (growing consensus counts) drive the error to machine level while
the fixed-t variants plateau at a t-dependent neighborhood.
"""

from neardgd import MethodSpec, build_consensus_matrix, build_ring, run, \
    sample_quartic_problem

BUDGET = 1000  # gradient evaluations, shared by all methods

problem = sample_quartic_problem(n=12, p=4, index=4, c=1.0, seed=0)
cm = build_consensus_matrix(build_ring(12))

methods = [
    MethodSpec("near-dgd-t", t=1),
    MethodSpec("near-dgd-t", t=5),
    MethodSpec("near-dgd-plus"),
    MethodSpec("near-dgd-plus-doubling", period=100),
    MethodSpec("dgd"),
    MethodSpec("gradient-tracking"),
]

print("%-28s %12s %14s %12s %10s" % ("method", "f_err", "grad_avg_norm",
                                     "cons_dist", "comms"))
for method in methods:
    res = run(problem, cm, method, alpha=0.1, budget=BUDGET, seed=0)
    final = res.trace.final
    print("%-28s %12.3e %14.3e %12.3e %10d"
          % (method.label(), final.f_err, final.grad_avg_norm,
             final.cons_dist, res.counter.consensus_rounds))

print()
print("expected ordering: the growing-t variants reach ~0 error, t=5 lands")
print("well below t=1, and t=1 is in the same regime as plain DGD.")
