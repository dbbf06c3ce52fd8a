"""
Shared fixtures: hand-built mixtures far enough apart that every cluster is
a single micro-cluster.
"""

import pytest
import numpy as np

from profiler.synthesis import MixtureModel, ModelPair, StreamGenerator, StreamSpec


def _mixture(means):
    means = np.array(means, dtype=float)
    return MixtureModel(
        means=means,
        covariances=np.array([0.01 * np.eye(means.shape[1])] * len(means)),
        weights=np.full(len(means), 1.0 / len(means)),
    )


@pytest.fixture
def make_stream():
    """
    Builds a labelled latent stream of 200 hosts; the concept moves from
    corners (2, 2)/(8, 8) to (2, 8)/(8, 2) at instances_before.
    """

    def factory(instances_before=20, total_instances=45, seed=11, **kwargs):
        pre = _mixture([[2.0, 2.0], [8.0, 8.0]])
        post = _mixture([[2.0, 8.0], [8.0, 2.0]])
        spec = StreamSpec(
            instance_size=200,
            instances_before=instances_before,
            total_instances=total_instances,
            seed=seed,
            **kwargs,
        )
        return list(StreamGenerator(spec, ModelPair(pre=pre, post=post, distance=1.0, attempts=0)))

    return factory
