"""Exception types shared across the library."""

from __future__ import annotations


class IcrError(Exception):
    """Base class for all library errors."""


class MalformedSceneString(IcrError):
    """Scene string violates the grammar. Carries the byte offset and field name."""

    def __init__(self, message: str, *, offset: int, field: str):
        super().__init__(f"{message} (field={field!r}, offset={offset})")
        self.offset = offset
        self.field = field


class EmptySourceScene(IcrError):
    """Similarity is undefined for an empty source scene."""


class SchemaError(IcrError):
    """Dialogue file violates the expected schema."""

    def __init__(self, message: str, *, dialogue_id: str | None = None, field_path: str = ""):
        locus = f" [dialogue={dialogue_id!r}, field={field_path!r}]" if dialogue_id else f" [field={field_path!r}]"
        super().__init__(message + locus)
        self.dialogue_id = dialogue_id
        self.field_path = field_path


class SceneParseError(IcrError):
    """A scene string inside a dialogue failed to parse."""

    def __init__(self, cause: MalformedSceneString, *, dialogue_id: str, round_index: int | None):
        where = "source scene" if round_index is None else f"round {round_index}"
        super().__init__(f"{cause} at {where} of dialogue {dialogue_id!r}")
        self.cause = cause
        self.dialogue_id = dialogue_id
        self.round_index = round_index


class LabelFileError(IcrError):
    """Persisted label file is unreadable or corrupt."""


class DegenerateMarginals(IcrError):
    """Chance agreement is 1: kappa is undefined."""


class UnlabeledType(IcrError):
    """Projection requested but some types carry no label."""

    def __init__(self, type_ids):
        self.type_ids = tuple(sorted(type_ids))
        shown = ", ".join(str(t) for t in self.type_ids[:10])
        more = "" if len(self.type_ids) <= 10 else f" (+{len(self.type_ids) - 10} more)"
        super().__init__(f"{len(self.type_ids)} unlabeled type(s): {shown}{more}")


class EmptySample(IcrError):
    """A statistical test received an empty sample."""


class StoreFormatError(IcrError):
    """Base class for embedding-store file errors."""


class BadMagic(StoreFormatError):
    pass


class VersionMismatch(StoreFormatError):
    pass


class TruncatedFile(StoreFormatError):
    pass


class DimMismatch(StoreFormatError):
    pass


class MissingEmbedding(IcrError):
    """Datapoints reference keys absent from the store."""

    def __init__(self, keys):
        self.keys = tuple(sorted(keys))
        shown = ", ".join(self.keys[:5])
        more = "" if len(self.keys) <= 5 else f" (+{len(self.keys) - 5} more)"
        super().__init__(f"{len(self.keys)} missing embedding key(s): {shown}{more}")


class NonFiniteLoss(IcrError):
    """Training loss became NaN or infinite."""

    def __init__(self, *, epoch: int, batch: int):
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


class NoPositives(IcrError):
    """Average precision is undefined without positive labels."""


class SingleClassTraining(IcrError):
    """Logistic regression needs both labels in the training set."""
