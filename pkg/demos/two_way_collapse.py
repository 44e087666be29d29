"""Walk through collapsing a two-way survey table.

The bundled 5x5 schooling-by-age cross-tabulation (n = 3673) carries almost
all of its association information in a handful of category contrasts.
This script shows the tools in the order an analysis would use them:

1. pairwise loss matrices, to see which categories behave alike;
2. the greedy collapsing trace, merging the cheapest pair each step;
3. Pearson ratios of the collapsed model against independence;
4. the deviance-versus-parameters curve and its concentration coefficient.
"""

import numpy as np

from pcctab import (
    apply_partition,
    expand_model,
    independence_expected,
    info_concentration,
    loss_matrix,
    pearson_ratios,
    run_pcc,
    SparseTable,
)
from pcctab.datasets import wermuth_cox
from pcctab.report import render_loss_matrix, render_pcc_trace

scheme, table = wermuth_cox()
print(f"table {table.shape}, n = {table.total:.0f}\n")

# 1. Which schooling categories are interchangeable?  Small entries mean the
#    two rows have nearly proportional age profiles.
for dim, var in enumerate(scheme.variables):
    print(f"pairwise aggregation loss for {var.name}:")
    print(render_loss_matrix(loss_matrix(table, dim), list(var.categories)))

# 2. Run the full collapsing sequence.  Row 1 merges the two oldest age
#    groups at a loss of 0.84 on 4 df; by the 2x2 stage two thirds of the
#    association information is still retained.
trace = run_pcc(table, scheme.treatments)
print("collapsing trace:")
print(render_pcc_trace(trace))

# 3. The model after four merges is a 2x4 table.  Expanding it back to the
#    original shape and dividing by the independence expectations shows the
#    block structure the model imposes.
part = trace.partition_at(4)
collapsed = apply_partition(table, part)
probs = SparseTable(collapsed.shape, collapsed.coords, collapsed.counts / collapsed.total)
expansion = expand_model(probs, part, table.one_way_marginals())
model_counts = SparseTable(expansion.shape, expansion.coords,
                           expansion.counts * table.total)
ratios = pearson_ratios(model_counts, independence_expected(table))
print("expanded model / independence ratios after four merges:")
print(np.round(ratios, 2), "\n")

# 4. How concentrated is the information?  1.0 would mean a straight-line
#    curve (information spread evenly); small values mean a few parameters
#    carry almost everything.
coef = info_concentration(trace.curve())
print(f"concentration coefficient of the deviance curve: {coef:.3f}")
print("curve points (params, deviance):", trace.curve())
