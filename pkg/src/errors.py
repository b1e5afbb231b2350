"""
Exceptions raised by the simulator
"""


class SimulationError(Exception):
    """Base class for every failure detected while simulating the analyzer"""


class ZeroStateError(SimulationError, ValueError):
    """A linear combination cancelled to the zero vector"""


class NormalizationError(SimulationError, ValueError):
    """A state or coefficient set is not normalized within tolerance"""


class NonUnitaryError(SimulationError):
    """A label map changed the norm of the state it was applied to"""


class PhotonMismatchError(SimulationError, ValueError):
    """Two states over different photon sets were combined"""


class WiringError(SimulationError):
    """A photon reached an element on a path the element does not accept"""


class CounterOverflowError(SimulationError):
    """A probe phase counter left the range the circuit can produce"""


class UnexpectedCounterError(SimulationError):
    """A homodyne readout found a counter outside {-2, 0, +2}"""


class IndefiniteLabelError(SimulationError):
    """A photon expected to have a definite label is in a superposition"""


class IndefiniteSlotError(IndefiniteLabelError):
    """A photon reached a detector without a definite time slot"""


class InconsistentBranchError(SimulationError):
    """Measurement branches disagree on a label that should be deterministic"""


class TimeBinDisturbedError(SimulationError):
    """The polarization analyzer changed the time-bin reduced state"""


class AmbiguousMappingError(SimulationError):
    """A single-photon Bell input fired more than one detector port"""


class TableMismatchError(SimulationError):
    """A simulated table differs from its transcription"""


class AmbiguousResidualError(SimulationError):
    """A residual state has no unique unit overlap with a hyperentangled Bell state"""
