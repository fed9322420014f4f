"""
条件编码测试
"""
import itertools

import pytest
import torch

from conditioning import (
    ConditionConfig,
    SubplanEncoder,
    discretize_direction,
    tokenize_plan,
)
from models.errors import CapacityError, RangeError, VocabularyError
from models.plan import ActionType, PlanTable, Subgoal


@pytest.fixture
def encoder():
    torch.manual_seed(0)
    return SubplanEncoder(ConditionConfig(embed_dim=16))


def _move(direction, distance):
    return Subgoal(action_type=ActionType.MOVE, direction=direction, distance=distance)


class TestActionEmbedding:
    def test_lookup(self, encoder):
        assert torch.equal(encoder.embed_action_type("push"), encoder.embed_action_type(ActionType.PUSH))
        assert encoder.embed_action_type("move").shape == (16,)

    def test_unknown(self, encoder):
        with pytest.raises(VocabularyError):
            encoder.embed_action_type("jump")

    def test_gradient_only_on_row(self, encoder):
        encoder.embed_action_type("grasp").pow(2).sum().backward()
        grad = encoder.action_table.weight.grad
        row = ActionType.GRASP.index
        assert grad[row].abs().sum() > 0
        others = torch.cat([grad[:row], grad[row + 1:]])
        assert torch.count_nonzero(others) == 0


class TestDirection:
    def test_center_and_extremes(self):
        assert discretize_direction((0, 0, 0)) == 13
        assert discretize_direction((-1, -1, -1)) == 0
        assert discretize_direction((1, 1, 1)) == 26

    def test_bijective(self):
        codes = {discretize_direction(v) for v in itertools.product((-1, 0, 1), repeat=3)}
        assert codes == set(range(27))

    def test_out_of_range(self):
        with pytest.raises(RangeError):
            discretize_direction((2, 0, 0))


class TestDistanceEmbedding:
    def test_shape(self, encoder):
        assert encoder.embed_distance(0.3).shape == (16,)

    def test_negative(self, encoder):
        with pytest.raises(RangeError):
            encoder.embed_distance(-0.1)

    def test_continuity(self, encoder):
        enc = encoder.double()
        diff = (enc.embed_distance(0.2) - enc.embed_distance(0.2 + 1e-6)).abs().max().item()
        assert diff < 1e-4

    def test_gradient_check(self, encoder, fd_check):
        enc = encoder.double()
        weights = torch.randn(16, dtype=torch.float64, generator=torch.Generator().manual_seed(1))
        params = list(enc.distance_mlp.parameters())
        assert fd_check(lambda: (enc.embed_distance(0.37) * weights).sum(), params) < 1e-3


class TestSubgoalEmbedding:
    def test_shape_and_purity(self, encoder):
        g = _move((1, 0, -1), 0.2)
        a, b = encoder.embed_subgoal(g), encoder.embed_subgoal(g)
        assert a.shape == (16,)
        assert torch.equal(a, b)

    def test_distance_matters(self, encoder):
        assert not torch.allclose(encoder.embed_subgoal(_move((1, 0, 0), 0.1)),
                                  encoder.embed_subgoal(_move((1, 0, 0), 0.5)))


class TestTaskEmbedding:
    def test_distinct_rows(self, encoder):
        rows = [encoder.embed_task(t) for t in ("reach", "push", "pick_place")]
        for a, b in itertools.combinations(rows, 2):
            assert not torch.equal(a, b)

    def test_shape_and_determinism(self, encoder):
        assert encoder.embed_task("push").shape == (16,)
        assert torch.equal(encoder.embed_task("push"), encoder.embed_task("push"))

    def test_unknown(self, encoder):
        with pytest.raises(VocabularyError):
            encoder.embed_task("open_door")


class TestGlobalCondition:
    def test_padding_arithmetic(self, encoder):
        z = encoder.embed_task("push")
        cond = encoder.build_global_condition(z, [encoder.embed_subgoal(_move((1, 0, 0), 0.1))] * 3)
        assert cond.tokens.shape == (9, 16)
        assert cond.mask.tolist() == [True] * 4 + [False] * 5
        assert encoder.flatten(cond).shape == (9 * 16,)

    def test_empty_plan(self, encoder):
        cond = encoder.build_global_condition(encoder.embed_task("reach"), [])
        assert cond.mask.tolist() == [True] + [False] * 8

    def test_full_capacity(self, encoder):
        e = encoder.embed_subgoal(_move((0, 1, 0), 0.1))
        cond = encoder.build_global_condition(encoder.embed_task("reach"), [e] * 8)
        assert cond.mask.all()

    def test_capacity_error(self, encoder):
        e = encoder.embed_subgoal(_move((0, 1, 0), 0.1))
        with pytest.raises(CapacityError):
            encoder.build_global_condition(encoder.embed_task("reach"), [e] * 9)

    def test_padding_neutrality(self, encoder):
        plan = PlanTable(subgoals=(_move((1, 0, 0), 0.1), Subgoal(action_type=ActionType.PUSH)))
        cond = encoder.encode_plan(plan, "push")
        tampered = cond.model_copy(update={"tokens": cond.tokens.clone()})
        tampered.tokens[3:] = torch.randn(6, 16)
        assert torch.equal(encoder.flatten(cond), encoder.flatten(tampered))

    def test_order_is_semantic(self, encoder):
        a, b = _move((1, 0, 0), 0.1), _move((0, 0, -1), 0.2)
        first = encoder.flatten(encoder.encode_plan(PlanTable(subgoals=(a, b)), "push"))
        second = encoder.flatten(encoder.encode_plan(PlanTable(subgoals=(b, a)), "push"))
        assert not torch.allclose(first, second)

    def test_batch_forward_matches_single(self, encoder):
        plan = PlanTable(subgoals=(_move((1, 0, 0), 0.1), _move((0, -1, 0), 0.25), Subgoal(action_type=ActionType.GRASP)))
        single = encoder.flatten(encoder.encode_plan(plan, "pick_place"))
        batch = encoder.encode_tokens([tokenize_plan(plan)], ["pick_place"])
        assert torch.allclose(batch[0], single, atol=1e-6)

    def test_encoder_chain_gradients(self, encoder, fd_check):
        enc = encoder.double()
        plan = PlanTable(subgoals=(_move((-1, 0, 1), 0.19),))
        weights = torch.randn(9 * 16, dtype=torch.float64, generator=torch.Generator().manual_seed(2))

        def loss():
            return (enc.flatten(enc.encode_plan(plan, "push")) * weights).sum()

        assert fd_check(loss, list(enc.parameters())) < 1e-3
