import json

import numpy as np
import pytest

from icr.scene import (
    N_CLIPART_TYPES,
    N_EXPRESSIONS,
    N_POSES,
    PERSON_TYPE_IDS,
    Scene,
    make_clipart,
)
from icr.synthetic import GeneratorConfig, generate


def random_scene(rng: np.random.Generator, n_min: int = 1, n_max: int = 17,
                 integer_coords: bool = True) -> Scene:
    n = int(rng.integers(n_min, n_max + 1))
    type_ids = rng.choice(N_CLIPART_TYPES, size=n, replace=False)
    cliparts = []
    for local_index, type_id in enumerate(int(t) for t in type_ids):
        variant = None
        if type_id in PERSON_TYPE_IDS:
            variant = (int(rng.integers(0, N_EXPRESSIONS)), int(rng.integers(0, N_POSES)))
        if integer_coords:
            x, y = float(rng.integers(0, 500)), float(rng.integers(0, 400))
        else:
            x, y = float(rng.uniform(0, 500)), float(rng.uniform(0, 400))
        cliparts.append(make_clipart(type_id, x=x, y=y, depth=int(rng.integers(0, 3)),
                                     flip=bool(rng.integers(0, 2)), variant=variant,
                                     local_index=local_index))
    return Scene(tuple(cliparts))


def perturb_scene(rng: np.random.Generator, scene: Scene) -> Scene:
    """Random add/delete/move/resize/flip edits of a scene."""
    from dataclasses import replace

    cliparts = list(scene.cliparts)
    # deletions
    keep = [c for c in cliparts if rng.random() > 0.2]
    out = []
    for c in keep:
        if rng.random() < 0.3:
            c = replace(c, x=float(rng.integers(0, 500)), y=float(rng.integers(0, 400)))
        if rng.random() < 0.2:
            c = replace(c, depth=int((c.depth + 1) % 3))
        if rng.random() < 0.2:
            c = replace(c, flip=not c.flip)
        out.append(c)
    used_types = {c.type_id for c in out}
    free = sorted(set(range(N_CLIPART_TYPES)) - used_types - PERSON_TYPE_IDS)
    n_add = int(rng.integers(0, 3))
    for k in range(n_add):
        if not free:
            break
        type_id = int(free.pop(int(rng.integers(0, len(free)))))
        out.append(make_clipart(type_id, x=float(rng.integers(0, 500)),
                                y=float(rng.integers(0, 400)), depth=int(rng.integers(0, 3)),
                                flip=bool(rng.integers(0, 2)), local_index=200 + k))
    return Scene(tuple(out))


@pytest.fixture(scope="session")
def synth_small():
    return generate(GeneratorConfig(n_dialogues=40, seed=123))


@pytest.fixture(scope="session")
def synth_small_path(tmp_path_factory, synth_small):
    path = tmp_path_factory.mktemp("corpus") / "corpus.json"
    path.write_text(json.dumps(synth_small.payload), encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def loaded_small(synth_small_path):
    from icr.corpus import load_corpus

    return load_corpus(synth_small_path)
