"""
Reverse-mode gradient tape

A GradientTape keeps an ordered record of the primitive operations applied
during one forward pass. Every recorded value is wrapped in a Node; replaying
the record backward from a scalar loss yields the gradient of that loss with
respect to every Parameter watched on the tape.

Tapes are single-use and single-threaded: build one per forward/backward pass.
"""

from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from loster.errors import NonFiniteError, TapeUsageError

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class Parameter:
    """
    A named trainable array with its gradient buffer

    Attributes:
        name (str): Identifier unique within a model
        value (np.ndarray): Current float64 value
        grad (np.ndarray): Gradient written by the last backward pass
    """

    def __init__(self, name: str, value: np.ndarray) -> None:
        self.name = name
        self.value = np.array(value, dtype=np.float64, copy=True, order="C")
        self.grad = np.zeros_like(self.value)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    @property
    def size(self) -> int:
        return int(self.value.size)

    def zero_grad(self) -> None:
        """Reset the gradient buffer to zeros"""
        self.grad = np.zeros_like(self.value)

    def __repr__(self) -> str:
        return f"Parameter({self.name!r}, shape={self.shape})"


class Node:
    """
    A value produced on a tape

    Arithmetic operators are attached by loster.numcore.ops.

    Attributes:
        tape (GradientTape): Tape that owns the node
        value (np.ndarray): Forward value
        index (int): Position in the tape record
    """

    __slots__ = ("tape", "value", "index")

    # numpy defers to the reflected operators
    __array_ufunc__ = None

    def __init__(self, tape: "GradientTape", value: np.ndarray, index: int) -> None:
        self.tape = tape
        self.value = value
        self.index = index

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    @property
    def ndim(self) -> int:
        return self.value.ndim

    def item(self) -> float:
        """
        Get the value of a single-element node

        Returns:
            float: The scalar value
        """
        return float(self.value.reshape(-1)[0])

    def __repr__(self) -> str:
        return f"Node(index={self.index}, shape={self.shape})"


class _Record(NamedTuple):
    name: str
    parents: Tuple[int, ...]
    backward: BackwardFn


class GradientTape:
    """
    Ordered record of a forward computation plus a parameter registry

    Attributes:
        check_finite (bool): Raise NonFiniteError when a primitive yields NaN/Inf
    """

    def __init__(self, check_finite: bool = True) -> None:
        self.check_finite = check_finite
        self._nodes: List[Node] = []
        self._records: List[Optional[_Record]] = []
        self._parameters: Dict[str, Parameter] = {}
        self._leaves: Dict[str, Node] = {}

    def __len__(self) -> int:
        """Number of primitive operations recorded"""
        return sum(1 for record in self._records if record is not None)

    @property
    def parameters(self) -> List[Parameter]:
        return list(self._parameters.values())

    def _append(self, value: np.ndarray, record: Optional[_Record]) -> Node:
        node = Node(self, value, len(self._nodes))
        self._nodes.append(node)
        self._records.append(record)
        return node

    def watch(self, parameter: Parameter) -> Node:
        """
        Register a parameter and get the leaf node holding its value

        Watching the same parameter again returns the same leaf, so all uses
        accumulate into one gradient.

        Parameters:
            parameter (Parameter): Parameter to register

        Returns:
            Node: Leaf node for the parameter

        Raises:
            TapeUsageError: If another parameter with the same name is registered
        """
        known = self._parameters.get(parameter.name)
        if known is not None:
            if known is not parameter:
                raise TapeUsageError(
                    f"two different parameters share the name {parameter.name!r}"
                )
            return self._leaves[parameter.name]
        self._parameters[parameter.name] = parameter
        leaf = self._append(parameter.value, None)
        self._leaves[parameter.name] = leaf
        return leaf

    def constant(self, value: np.ndarray) -> Node:
        """
        Put a value on the tape that receives no gradient

        Parameters:
            value (np.ndarray): Array or scalar

        Returns:
            Node: Leaf node
        """
        return self._append(np.asarray(value, dtype=np.float64), None)

    def record(
        self,
        name: str,
        value: np.ndarray,
        parents: Sequence[Node],
        backward: BackwardFn,
    ) -> Node:
        """
        Record a primitive operation

        Parameters:
            name (str): Primitive name used in diagnostics
            value (np.ndarray): Forward value
            parents (Sequence[Node]): Inputs of the primitive
            backward (BackwardFn): Maps the output adjoint to one adjoint per
                parent (None for no contribution)

        Returns:
            Node: Node for the output

        Raises:
            TapeUsageError: If a parent belongs to another tape
            NonFiniteError: If the value contains NaN or Inf
        """
        for parent in parents:
            if parent.tape is not self:
                raise TapeUsageError(f"{name}: operand recorded on another tape")
        value = np.asarray(value, dtype=np.float64)
        if self.check_finite and not np.all(np.isfinite(value)):
            raise NonFiniteError(f"{name} produced a non-finite value")
        parent_ids = tuple(parent.index for parent in parents)
        return self._append(value, _Record(name, parent_ids, backward))

    def backward(self, loss: Node) -> Dict[str, np.ndarray]:
        """
        Replay the tape backward from a scalar loss

        Gradients are written into each registered Parameter.grad (parameters
        the loss does not depend on get zeros) and returned by name.

        Parameters:
            loss (Node): Scalar node recorded on this tape

        Returns:
            Dict[str, np.ndarray]: Gradient per parameter name

        Raises:
            TapeUsageError: If the loss is not on this tape or is not scalar
        """
        if not isinstance(loss, Node) or loss.tape is not self:
            raise TapeUsageError("loss was not recorded on this tape")
        if loss.value.size != 1:
            raise TapeUsageError(f"loss must be a scalar, got shape {loss.shape}")

        adjoints: List[Optional[np.ndarray]] = [None] * len(self._nodes)
        adjoints[loss.index] = np.ones_like(loss.value)
        for index in range(loss.index, -1, -1):
            grad = adjoints[index]
            record = self._records[index]
            if grad is None or record is None:
                continue
            for parent, parent_grad in zip(record.parents, record.backward(grad)):
                if parent_grad is None:
                    continue
                current = adjoints[parent]
                adjoints[parent] = (
                    parent_grad if current is None else current + parent_grad
                )

        gradients: Dict[str, np.ndarray] = {}
        for name, parameter in self._parameters.items():
            grad = adjoints[self._leaves[name].index]
            if grad is None:
                parameter.grad = np.zeros_like(parameter.value)
            else:
                parameter.grad = np.array(grad, dtype=np.float64).reshape(
                    parameter.shape
                )
            gradients[name] = parameter.grad
        return gradients


def backward(tape: GradientTape, loss: Node) -> Dict[str, np.ndarray]:
    """
    Compute gradients of a scalar loss for all parameters on a tape

    Parameters:
        tape (GradientTape): Tape holding the forward pass
        loss (Node): Scalar loss node

    Returns:
        Dict[str, np.ndarray]: Gradient per parameter name
    """
    if not isinstance(loss, Node) or loss.tape is not tape:
        raise TapeUsageError("loss was not recorded on this tape")
    return tape.backward(loss)
