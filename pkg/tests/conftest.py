import numpy as np
import pytest

from cokinetic.manifold import ModelSpec
from cokinetic.isotopy import CoIsotopy, Generator, ReebComponent


@pytest.fixture
def model():
    return ModelSpec(n=1, z_topology="circle")


@pytest.fixture
def line_model():
    return ModelSpec(n=1, z_topology="line")


def random_trig_generator(model, rng, max_terms=6, amplitude=1.0):
    """Random autonomous generator with frequencies in {-1,0,1}^2 x {0}."""
    terms = []
    for _ in range(int(rng.integers(1, max_terms + 1))):
        k = [int(rng.integers(-1, 2)) for _ in range(model.dim - 1)] + [0]
        if not any(k):
            k[int(rng.integers(0, model.dim - 1))] = 1
        terms.append((tuple(k), float(rng.uniform(-amplitude, amplitude)),
                      float(rng.uniform(-amplitude, amplitude))))
    return Generator.autonomous(model, terms)


def random_co_ham(model, rng, steps=1024, **kw):
    return CoIsotopy(model=model, generator=random_trig_generator(model, rng, **kw),
                     kind="coHamiltonian", steps=steps)


def random_almost(model, rng, steps=1024, z_dependent=True):
    gen = random_trig_generator(model, rng, amplitude=0.7)
    kz = [0, 1] if z_dependent else [0]
    a = [[float(rng.uniform(-0.3, 0.3))]]
    b = [[0.0]]
    if z_dependent:
        a.append([float(rng.uniform(-0.25, 0.25))])
        b.append([float(rng.uniform(-0.25, 0.25))])
    reeb = ReebComponent(kz=np.array(kz), a=np.array(a), b=np.array(b))
    return CoIsotopy(model=model, generator=gen, reeb=reeb,
                     kind="almostCoHamiltonian", steps=steps)


def sin_y_isotopy(model, steps=1024):
    gen = Generator.autonomous(model, [((0, 1, 0), 0.0, 1.0)])
    return CoIsotopy(model=model, generator=gen, kind="coHamiltonian", steps=steps)
