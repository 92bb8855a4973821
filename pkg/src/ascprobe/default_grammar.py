"""Built-in grammar: slot fillers for the four argument structure constructions.

Fillers are lowercase word strings with determiners embedded ("the baker",
"into the garden"), so realization is plain concatenation. Verb lists are
class-specific and mutually disjoint; subjects and objects are shared across
classes. Filler word counts vary on purpose so sentence lengths differ and
padding is actually exercised.
"""

SUBJECTS = [
    "the baker",
    "the teacher",
    "the cat",
    "the chef",
    "the farmer",
    "the girl",
    "a boy",
    "his mother",
    "the old man",
    "a stranger",
    "the artist",
    "the dog",
    "her brother",
    "the plumber",
]

OBJECTS = [
    "a cake",
    "the mouse",
    "the cake",
    "homework",
    "a book",
    "the ball",
    "the cart",
    "a letter",
    "the window",
    "a song",
    "the box",
    "the fence",
    "his bike",
    "a heavy crate",
]

RECIPIENTS = [
    "students",
    "him",
    "her",
    "the children",
    "his friend",
    "the visitors",
    "her sister",
    "the customer",
    "us",
]

PATHS = [
    "into the garden",
    "into the garage",
    "onto the table",
    "across the street",
    "through the door",
    "over the fence",
    "under the bridge",
    "toward the river",
    "out of the room",
]

RESULT_STATES = [
    "into slices",
    "red",
    "flat",
    "open",
    "clean",
    "into pieces",
    "smooth",
    "shiny",
    "to bits",
]

VERBS = {
    "transitive": [
        "baked",
        "watched",
        "carried",
        "cleaned",
        "grabbed",
        "held",
        "admired",
        "dropped",
        "lifted",
        "found",
    ],
    "ditransitive": [
        "gave",
        "sent",
        "handed",
        "offered",
        "showed",
        "sold",
        "brought",
        "mailed",
        "lent",
        "promised",
    ],
    "caused_motion": [
        "chased",
        "pushed",
        "pulled",
        "threw",
        "kicked",
        "rolled",
        "dragged",
        "shoved",
        "tossed",
        "guided",
    ],
    "resultative": [
        "cut",
        "painted",
        "wiped",
        "hammered",
        "froze",
        "boiled",
        "squashed",
        "stretched",
        "swept",
        "polished",
    ],
}
