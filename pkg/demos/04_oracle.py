"""
Cross-checking with random polynomial ensembles
================================================

Draw compliant ensembles with integer polynomial entries, integrate the
averaged controllability matrix exactly over the rationals and take its
rank.  A failing pattern never reaches full rank; a qualifying one almost
always does.
"""

# %%
from pathlib import Path

from avgctrl import cross_validate, oracle_rank, oracle_sample, parse_edge_list, random_pattern

fig1 = parse_edge_list(Path(__file__).with_name("fig1.txt").read_text())
rep = cross_validate(fig1, 30, seed=7)
print("fig1: full rank in", rep.full_rank_count, "of", len(rep.ranks), "agreement", rep.agreement)

# %%
star = parse_edge_list("b a1\nb a2\n")
print("star ranks:", sorted(set(cross_validate(star, 30).ranks)))

# %%
# a single sample, degree 2, first six columns
pe = oracle_sample(fig1, 2, 42)
print(pe.b)
print("rank of 18 columns:", oracle_rank(pe, 18))

# %%
# necessity on generated failing patterns
worst = 0
for seed in range(20):
    g = random_pattern(5, False, seed)
    worst = max(worst, max(cross_validate(g, 5, seed=seed).ranks))
print("largest rank seen on failing 5-node patterns:", worst)
