from dataclasses import dataclass
from enum import Enum, auto


class SortKind(Enum):
    OBJECT = auto()
    ACTION = auto()
    SITUATION = auto()
    REAL = auto()


@dataclass(frozen=True)
class Sort:
    """A sort of the language; object sorts are named by the theory"""
    kind: SortKind
    name: str

    @property
    def is_object(self) -> bool:
        return self.kind is SortKind.OBJECT

    def __str__(self):
        return self.name


ACTION = Sort(SortKind.ACTION, "Action")
SITUATION = Sort(SortKind.SITUATION, "Situation")
REAL = Sort(SortKind.REAL, "Real")

# Time is not a separate sort.
TIME = REAL

BUILTIN_SORTS = {"Action": ACTION, "Situation": SITUATION, "Real": REAL, "Time": REAL}


def object_sort(name: str) -> Sort:
    return Sort(SortKind.OBJECT, name)


def sort_named(name: str) -> Sort:
    """Resolve a sort name as written in a theory file"""
    return BUILTIN_SORTS.get(name) or object_sort(name)
