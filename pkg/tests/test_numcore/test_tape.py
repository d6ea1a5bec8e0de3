import pytest
import sys
import os

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", ".."))

from loster.errors import NonFiniteError, TapeUsageError
from loster.numcore import GradientTape, Parameter, backward
from loster.numcore import ops


class TestParameter:
    """
    Test cases for Parameter.

    Test cases:
    - Value is stored as a float64 copy
    - Gradient buffer starts at zero and can be reset
    """

    def test_value_is_copied(self):
        """Test that later changes to the source array do not leak in."""
        source = np.array([[1, 2], [3, 4]])
        param = Parameter("w", source)
        source[0, 0] = 100
        assert param.value.dtype == np.float64
        assert param.value[0, 0] == 1.0
        assert param.shape == (2, 2)
        assert param.size == 4

    def test_zero_grad(self):
        """Test that zero_grad clears the gradient buffer."""
        param = Parameter("w", np.ones(3))
        param.grad = np.full(3, 7.0)
        param.zero_grad()
        assert np.array_equal(param.grad, np.zeros(3))


class TestGradientTape:
    """
    Test cases for the gradient tape.

    Test cases:
    - Gradients of a simple expression
    - Accumulation when a parameter is used twice
    - Zero gradient for watched but unused parameters
    - Usage errors: foreign loss, non-scalar loss, duplicate names
    - Non-finite values are rejected
    - Linearity of backward
    """

    def test_simple_expression(self):
        """Test d/dw sum(w * x) = x."""
        w = Parameter("w", np.array([1.0, 2.0, 3.0]))
        x = np.array([4.0, 5.0, 6.0])
        tape = GradientTape()
        loss = ops.sum(tape.watch(w) * x)
        grads = tape.backward(loss)
        assert loss.item() == 32.0
        assert np.array_equal(grads["w"], x)
        assert np.array_equal(w.grad, x)

    def test_parameter_used_twice(self):
        """Test that two uses of the same parameter accumulate."""
        w = Parameter("w", np.array([3.0]))
        tape = GradientTape()
        first = tape.watch(w)
        second = tape.watch(w)
        assert first is second
        loss = ops.sum(first * second)
        tape.backward(loss)
        assert w.grad[0] == pytest.approx(6.0)

    def test_unused_parameter_gets_zeros(self):
        """Test that a watched parameter the loss ignores gets a zero gradient."""
        used = Parameter("used", np.ones(2))
        unused = Parameter("unused", np.ones(3))
        unused.grad = np.ones(3)
        tape = GradientTape()
        tape.watch(unused)
        tape.backward(ops.sum(tape.watch(used)))
        assert np.array_equal(unused.grad, np.zeros(3))

    def test_loss_from_another_tape(self):
        """Test that a loss recorded elsewhere is rejected."""
        w = Parameter("w", np.ones(2))
        other = GradientTape()
        loss = ops.sum(other.watch(w))
        with pytest.raises(TapeUsageError):
            GradientTape().backward(loss)
        with pytest.raises(TapeUsageError):
            backward(GradientTape(), loss)

    def test_non_scalar_loss(self):
        """Test that a vector loss is rejected."""
        tape = GradientTape()
        node = tape.watch(Parameter("w", np.ones(2))) * 2.0
        with pytest.raises(TapeUsageError):
            tape.backward(node)

    def test_duplicate_names(self):
        """Test that two parameters may not share a name on one tape."""
        tape = GradientTape()
        tape.watch(Parameter("w", np.ones(2)))
        with pytest.raises(TapeUsageError):
            tape.watch(Parameter("w", np.ones(2)))

    def test_mixing_tapes(self):
        """Test that operands from two tapes cannot be combined."""
        a = GradientTape().constant(np.ones(2))
        b = GradientTape().constant(np.ones(2))
        with pytest.raises(TapeUsageError):
            ops.add(a, b)

    def test_non_finite_value(self):
        """Test that a primitive producing inf raises NonFiniteError."""
        tape = GradientTape()
        node = tape.watch(Parameter("w", np.array([1000.0])))
        with pytest.raises(NonFiniteError):
            ops.exp(node)

    def test_non_finite_check_can_be_disabled(self):
        """Test that check_finite=False lets inf through."""
        tape = GradientTape(check_finite=False)
        node = ops.exp(tape.watch(Parameter("w", np.array([1000.0]))))
        assert np.isinf(node.value[0])

    def test_linearity(self):
        """Test that backward(a*f + b*g) equals a*grad f + b*grad g."""
        rng = np.random.default_rng(3)
        w = Parameter("w", rng.normal(size=(4, 3)))
        x = rng.normal(size=(5, 4))

        def f(tape):
            return ops.sum_squares(ops.matmul(x, tape.watch(w)))

        def g(tape):
            return ops.sum(ops.exp(ops.scale(tape.watch(w), 0.1)))

        tape = GradientTape()
        grad_f = tape.backward(f(tape))["w"].copy()
        tape = GradientTape()
        grad_g = tape.backward(g(tape))["w"].copy()
        tape = GradientTape()
        combined = tape.backward(2.0 * f(tape) + (-3.0) * g(tape))["w"]
        assert np.allclose(combined, 2.0 * grad_f - 3.0 * grad_g, rtol=0, atol=1e-12)

    def test_determinism(self):
        """Test that identical inputs give bitwise-identical values."""
        rng = np.random.default_rng(0)
        w = Parameter("w", rng.normal(size=(3, 3)))
        x = rng.normal(size=(4, 3))
        values = []
        for _ in range(2):
            tape = GradientTape()
            values.append(ops.softmax(ops.matmul(x, tape.watch(w))).value)
        assert np.array_equal(values[0], values[1])

    def test_len_counts_primitives(self):
        """Test that leaves are not counted as operations."""
        tape = GradientTape()
        node = tape.watch(Parameter("w", np.ones(2)))
        ops.sum(ops.square(node))
        assert len(tape) == 2
