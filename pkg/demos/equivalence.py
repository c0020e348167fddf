"""
Lower discount or uniform averaging: same policy
=================================================

Planning River Swim with a reduced discount factor and planning it with
the full discount but transitions pulled toward the uniform matrix give
different value functions and the same optimal policy.
"""
import numpy as np

from discreg import make_river_swim, value_iteration
from discreg.estimation import uniform_matrix

mdp = make_river_swim()
eps = 0.3

# planning discount gamma * (1 - eps), true transitions
short = value_iteration(mdp.replace(gamma=mdp.gamma * (1 - eps)))

# full discount, transitions averaged with identical uniform rows
t_avg = (1 - eps) * mdp.transitions + eps * uniform_matrix(mdp.n_states)
averaged = value_iteration(mdp.replace(transitions=t_avg))

print("state  V(short)  V(averaged)  action")
for s in range(mdp.n_states):
    print(f"{s:5d} {short.v[s]:9.3f} {averaged.v[s]:11.3f}  {short.policy[s]} / {averaged.policy[s]}")

# the same holds for random MDPs and any row shared by every (s, a)
from discreg import run_theorem_check

trials = run_theorem_check(200, seed=1)
print(f"\n{sum(t.passed for t in trials)}/{len(trials)} random MDPs agree")
