import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from icr.errors import EmptySourceScene, MalformedSceneString
from icr.scene import (
    EMPTY_SCENE,
    STRICT_GRAMMAR,
    Action,
    ActionKind,
    ComponentSimilarity,
    Scene,
    count_actions,
    diff_scenes,
    make_clipart,
    parse_scene,
    replay_actions,
    scene_similarity,
    scenes_equal,
    serialize_scene,
)

from conftest import perturb_scene, random_scene


# ---------------------------------------------------------------------------
# Parsing and serialization
# ---------------------------------------------------------------------------

def test_parse_empty_string_and_sentinel():
    assert len(parse_scene("")) == 0
    assert len(parse_scene("0")) == 0
    assert serialize_scene(EMPTY_SCENE) == "0"


def test_fixture_two_cliparts_field_by_field():
    scene = Scene((
        make_clipart(18, x=120, y=300, depth=1, flip=False, local_index=0),   # slide
        make_clipart(0, x=250.5, y=80, depth=2, flip=True, variant=(3, 6), local_index=1),  # boy
    ))
    text = serialize_scene(scene)
    # Independent field-by-field read of the documented record layout.
    fields = text.split(",")
    assert fields[0] == "2"
    assert fields[1:8] == ["slide", "0", "18", "120", "300", "1", "0"]
    assert fields[8:15] == ["boy3_6", "1", "0", "250.5", "80", "2", "1"]

    parsed = parse_scene(text)
    assert len(parsed) == 2
    slide, boy = parsed.cliparts
    assert (slide.type_id, slide.x, slide.y, slide.depth, slide.flip) == (18, 120.0, 300.0, 1, False)
    assert slide.variant is None
    assert (boy.type_id, boy.x, boy.y, boy.depth, boy.flip) == (0, 250.5, 80.0, 2, True)
    assert boy.variant == (3, 6)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans())
def test_roundtrip_over_generated_scenes(seed, integer_coords):
    rng = np.random.default_rng(seed)
    scene = random_scene(rng, n_min=0, n_max=17, integer_coords=integer_coords)
    text = serialize_scene(scene)
    assert serialize_scene(parse_scene(text)) == text
    assert scenes_equal(parse_scene(text), scene)
    # canonical output also passes strict mode
    assert scenes_equal(parse_scene(text, STRICT_GRAMMAR), scene)


@pytest.mark.parametrize("text,field", [
    ("2,slide,0,18,120,300,1,0", "name"),              # count claims 2; input ends at the next name
    ("1,slide,0,18,abc,300,1,0", "x"),                 # non-numeric
    ("1,slide,0,99,120,300,1,0", "type_id"),           # out of range
    ("1,slide,0,18,120,300,7,0", "depth"),             # out of range
    ("1,slide,0,18,120,300,1,2", "flip"),              # out of range
    ("1,boy,0,0,120,300,1,0", "name"),                 # person without variant suffix
    ("x", "count"),                                     # non-numeric count
    ("1,slide,0,18,120,300,1,0,extra", "count"),       # trailing fields
])
def test_malformed_scene_strings(text, field):
    with pytest.raises(MalformedSceneString) as err:
        parse_scene(text)
    assert err.value.field == field
    assert 0 <= err.value.offset <= len(text)


def test_malformed_offset_points_at_bad_field():
    text = "1,slide,0,18,120,zzz,1,0"
    with pytest.raises(MalformedSceneString) as err:
        parse_scene(text)
    assert text[err.value.offset:].startswith("zzz")


def test_strict_mode_rejects_tolerant_inputs():
    assert len(parse_scene("1, slide ,0,18,120,300,1,0")) == 1  # tolerant strips spaces
    with pytest.raises(MalformedSceneString):
        parse_scene("1, slide ,0,18,120,300,1,0", STRICT_GRAMMAR)
    with pytest.raises(MalformedSceneString):
        parse_scene("1,slide,0,18,120.0,300,1,0", STRICT_GRAMMAR)  # non-canonical number
    with pytest.raises(MalformedSceneString):
        parse_scene("1,wrongname,0,18,120,300,1,0", STRICT_GRAMMAR)


def test_duplicate_keys_rejected():
    with pytest.raises(MalformedSceneString):
        parse_scene("2,slide,0,18,1,2,0,0,slide,0,18,3,4,0,0")


# ---------------------------------------------------------------------------
# Diffing
# ---------------------------------------------------------------------------

def test_diff_identity_is_no_action():
    rng = np.random.default_rng(0)
    scene = random_scene(rng)
    assert diff_scenes(scene, scene) == [Action(ActionKind.NO_ACTION)]


def test_diff_single_insertion():
    clipart = make_clipart(5, x=10, y=20)
    actions = diff_scenes(EMPTY_SCENE, Scene((clipart,)))
    assert [a.kind for a in actions] == [ActionKind.ADD]
    assert actions[0].after == clipart


def test_move_and_flip_count_as_two_actions():
    from dataclasses import replace

    before = make_clipart(5, x=10, y=20, flip=False)
    after = replace(before, x=100.0, y=30.0, flip=True)
    actions = diff_scenes(Scene((before,)), Scene((after,)))
    assert sorted(a.kind.value for a in actions) == ["flip", "move"]
    assert count_actions(actions).total == 2


def test_no_duplicate_kind_per_key_and_replay_reproduces():
    rng = np.random.default_rng(42)
    for _ in range(300):
        a = random_scene(rng, n_min=0)
        b = perturb_scene(rng, a)
        actions = diff_scenes(a, b)
        seen = set()
        for action in actions:
            if action.kind is not ActionKind.NO_ACTION:
                assert (action.kind, action.object_key) not in seen
                seen.add((action.kind, action.object_key))
        assert scenes_equal(replay_actions(a, actions), b)


def brute_force_action_count(a: Scene, b: Scene) -> int:
    """Independent comparator enumerating all (key, attribute-class) pairs."""
    count = 0
    a_keys, b_keys = a.keyed(), b.keyed()
    for key in a_keys:
        if key not in b_keys:
            count += 1  # delete
    for key in b_keys:
        if key not in a_keys:
            count += 1  # add
    for key in set(a_keys) & set(b_keys):
        ca, cb = a_keys[key], b_keys[key]
        if abs(ca.x - cb.x) > 1e-6 or abs(ca.y - cb.y) > 1e-6:
            count += 1
        if ca.depth != cb.depth:
            count += 1
        if ca.flip != cb.flip:
            count += 1
    return count


def test_count_matches_brute_force_on_random_pairs():
    rng = np.random.default_rng(7)
    for _ in range(300):
        a = random_scene(rng, n_min=0)
        b = perturb_scene(rng, a)
        assert count_actions(diff_scenes(a, b)).total == brute_force_action_count(a, b)


def test_count_actions_breakdown():
    assert count_actions([Action(ActionKind.NO_ACTION)]).total == 0
    actions = [Action(ActionKind.ADD, "a"), Action(ActionKind.MOVE, "b"), Action(ActionKind.FLIP, "c")]
    counted = count_actions(actions)
    assert counted.total == 3
    assert counted.additions == 1
    assert counted.edits == 2


# ---------------------------------------------------------------------------
# Similarity
# ---------------------------------------------------------------------------

def test_similarity_perfect_and_empty():
    rng = np.random.default_rng(3)
    scene = random_scene(rng, n_min=3)
    assert scene_similarity(scene, scene) == 5.0
    assert scene_similarity(scene, EMPTY_SCENE) == 0.0
    with pytest.raises(EmptySourceScene):
        scene_similarity(EMPTY_SCENE, scene)


def test_similarity_three_clipart_fixture_hand_formula():
    source = Scene((
        make_clipart(5, x=100, y=100, local_index=0),
        make_clipart(9, x=200, y=50, depth=1, local_index=1),
        make_clipart(20, x=400, y=300, flip=True, local_index=2),
    ))
    recon = Scene(source.cliparts[:2])  # two correct, one missing
    # Hand evaluation of the documented formula: F1 = 2*2/(3+2) = 0.8 with
    # perfect attribute agreement, so the score is 5 * 0.8 * 1 = 4.0.
    assert scene_similarity(source, recon) == pytest.approx(4.0, abs=1e-12)


def test_similarity_attribute_agreement_hand_value():
    source = Scene((make_clipart(5, x=100, y=100, depth=0, flip=False, local_index=0),))
    from dataclasses import replace

    wrong_flip = Scene((replace(source.cliparts[0], flip=True),))
    # One matched pair, agreement = mean(flip 0, depth 1, position 1) = 2/3.
    assert scene_similarity(source, wrong_flip) == pytest.approx(5 * 1.0 * (2 / 3), abs=1e-12)

    moved = Scene((replace(source.cliparts[0], x=200.0),))
    diag = math.hypot(500, 400)
    expected = 5 * (2 / 3 + (1 - 100 / diag) / 3)
    assert scene_similarity(source, moved) == pytest.approx(expected, abs=1e-12)


def test_similarity_order_invariance_and_perfect_iff_attribute_equal():
    rng = np.random.default_rng(11)
    for _ in range(50):
        scene = random_scene(rng, n_min=2)
        shuffled = Scene(tuple(scene.cliparts[::-1]))
        assert scene_similarity(scene, shuffled) == 5.0
        reordered = scene_similarity(scene, Scene(tuple(reversed(scene.cliparts))))
        assert reordered == scene_similarity(scene, scene)
        broken = perturb_scene(rng, scene)
        same_attrs = sorted(c.metric_attributes() for c in scene.cliparts) == \
            sorted(c.metric_attributes() for c in broken.cliparts)
        assert (scene_similarity(scene, broken) == 5.0) == same_attrs


def test_similarity_monotone_in_single_attribute_fixes():
    from dataclasses import replace

    rng = np.random.default_rng(19)
    for _ in range(50):
        source = random_scene(rng, n_min=3)
        recon = perturb_scene(rng, source)
        if not recon.cliparts:
            continue
        base = scene_similarity(source, recon)
        source_by_type = {c.type_id: c for c in source.cliparts}
        for i, c in enumerate(recon.cliparts):
            target = source_by_type.get(c.type_id)
            if target is None:
                continue
            for fixed in (replace(c, flip=target.flip), replace(c, depth=target.depth),
                          replace(c, x=target.x, y=target.y)):
                improved = Scene(tuple(fixed if j == i else rc for j, rc in enumerate(recon.cliparts)))
                assert scene_similarity(source, improved) >= base - 1e-12


def test_similarity_position_tolerance_gives_exact_five():
    source = Scene((make_clipart(5, x=100, y=100, local_index=0),
                    make_clipart(9, x=10, y=10, local_index=1)))
    from dataclasses import replace

    nudged = Scene((replace(source.cliparts[0], x=100 + 5e-7), source.cliparts[1]))
    assert scene_similarity(source, nudged) == 5.0


def test_custom_metric_is_pluggable():
    calls = []

    def metric(source, recon):
        calls.append((len(source), len(recon)))
        return 1.23

    scene = Scene((make_clipart(5, x=1, y=1),))
    assert scene_similarity(scene, EMPTY_SCENE, metric) == 1.23
    assert calls == [(1, 0)]


def test_component_similarity_configurable_canvas():
    metric = ComponentSimilarity(canvas_width=100, canvas_height=100)
    source = Scene((make_clipart(5, x=0, y=0),))
    from dataclasses import replace

    far = Scene((replace(source.cliparts[0], x=90.0),))
    diag = math.hypot(100, 100)
    assert metric(source, far) == pytest.approx(5 * (2 / 3 + (1 - 90 / diag) / 3), abs=1e-12)


def test_scene_json_fixture_roundtrip():
    from icr.scene import scene_from_json, scene_to_json

    rng = np.random.default_rng(21)
    scene = random_scene(rng, n_min=2)
    records = scene_to_json(scene)
    assert all({"key", "name", "type_id", "x", "y", "depth", "flip"} <= set(r) for r in records)
    assert scenes_equal(scene_from_json(records), scene)
    import json

    assert scenes_equal(scene_from_json(json.loads(json.dumps(records))), scene)
