DELIMITER = "</s></s>"
PLACEHOLDER = "<STATE>"
PAD = "<pad>"
BOS = "<bos>"
UNK = "<unk>"

ACTION_MARKER = "Action:"
GOAL_MARKER = "GC:"
ACTIONS_MARKER = "Actions:"
STATE_MARKER = "State:"
DESCRIPTION_MARKER = "Description:"
INVENTORY_MARKER = "Inventory:"

FIELD_MARKERS = (
    ACTION_MARKER,
    GOAL_MARKER,
    ACTIONS_MARKER,
    STATE_MARKER,
    DESCRIPTION_MARKER,
    INVENTORY_MARKER,
)
SPECIAL_TOKENS = (PAD, BOS, UNK, DELIMITER, PLACEHOLDER, *FIELD_MARKERS)

GOAL_VALUES = range(101)


def goal_token(value: int) -> str:
    return f"GC_{value}"
