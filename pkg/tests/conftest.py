import time

import pytest

from recallwatch.evalharness import LabeledEvalSet
from recallwatch.informed_prior import fit_informed_featurized
from recallwatch.linmodel import FitParams
from recallwatch.pu_train import PUConfig, featurize
from recallwatch.synthgen import SynthConfig, generate
from recallwatch.vectorizer import build_vocabulary

SMALL = dict(n_complaints=300, n_reviews=6_000, hazard_rate=0.03, n_products=120,
             n_eval_hazardous=60, n_eval_benign=240)


class World:
    """A generated corpus with everything the pipeline derives from it."""

    def __init__(self, cfg, min_df, tau=5, s=None):
        start = time.perf_counter()
        self.sc = generate(cfg)
        self.vocab = build_vocabulary(self.sc.reviews, min_df, 0.95)
        self.data = featurize(self.sc.complaints, self.sc.reviews, self.vocab)
        self.eval_set = LabeledEvalSet.from_corpus(self.sc.eval_reviews, self.sc.eval_labels, self.vocab)
        self.pu = PUConfig(tau=tau, s=s if s is not None else 20_000, seed=cfg.seed)
        self.fit = fit_informed_featurized(self.data, self.pu, FitParams())
        self.seconds = time.perf_counter() - start


@pytest.fixture(scope="session")
def small_world():
    return World(SynthConfig(seed=0, **SMALL), min_df=5, s=3_000)


@pytest.fixture(scope="session")
def default_worlds():
    """The default synthetic configuration (2,000 complaints, 100,000 reviews) for seeds 0..2."""
    return [World(SynthConfig(seed=seed), min_df=50) for seed in range(3)]
