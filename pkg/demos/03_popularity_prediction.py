"""
Predicting popularity from the first six hours
==============================================

Build a synthetic corpus whose cascades last for hours, keep the ones with
more than 10 events in hour one and more than 100 within 48 hours, fit each
on its first 6 hours, and score predictions 1..42 hours later with MAPE and
accuracy at a 0.2 tolerance.
"""
import numpy as np

from sehp import FilterCriteria, SehpParams, SimConfig, filter_cascades, fit, horizon_sweep, simulate_corpus

HOUR = 3600.0
TRAIN_T = 6 * HOUR

params = SehpParams(v=0.02, alpha=1.6e-4, beta=2e-4)  # decay time about 1.4 h
corpus, truth = simulate_corpus([SimConfig(params, 48 * HOUR, seed=s) for s in range(30)])
kept = filter_cascades(corpus, FilterCriteria())
print(f"{len(kept)} of {len(corpus)} cascades pass the selection rule; truth: {truth}")

fits = [fit(c.truncate(TRAIN_T)) for c in kept]
reports = horizon_sweep(fits, kept, TRAIN_T, HOUR * np.arange(1, 43))
for rep in reports[::6]:
    print(f"+{rep.horizon / HOUR:4.0f} h  MAPE={rep.mape:.3f}  accuracy={rep.accuracy:.2f}  (M={rep.n_items})")
