"""Structured records and their expected canonical renderings."""

from timegrain.grammar import EventAnnotation, SampleRecord, Task

BOX_RECORD = SampleRecord(
    "box-example",
    10.0,
    Task.DENSE_CAPTION,
    [
        EventAnnotation([(0.0, 2.5), (3.2, 8.0)], "A male voice delivers a great performance.", "speech"),
        EventAnnotation([(0.0, 9.0)], "the soundtrack is filled with rich music.", "music"),
    ],
)
BOX_TEXT = (
    "<s><audio>F_audio</audio>\n"
    "<a0><f0> - <a2><f5>, <a3><f2> - <a8><f0>, A male voice delivers a great performance.\n"
    "<a0><f0> - <a9><f0>, the soundtrack is filled with rich music.</s>"
)

DENSE_RECORD = SampleRecord(
    "dense-example",
    10.0,
    Task.DENSE_CAPTION,
    [
        EventAnnotation([(1.4, 3.7), (4.3, 5.1), (5.4, 6.3), (7.0, 8.7)],
                        "A baby's cries pierce through the air intermittently."),
        EventAnnotation([(2.5, 2.9), (4.3, 4.5)], "A young child speaks briefly."),
        EventAnnotation([(0.3, 10.0)], "Conversations fill the space."),
        EventAnnotation([(0.2, 0.4)], "A cough interrupts the ongoing dialogue."),
    ],
)
DENSE_TEXT = (
    "1.4 - 3.7, 4.3 - 5.1, 5.4 - 6.3, 7.0 - 8.7 seconds, A baby's cries pierce through the air "
    "intermittently. 2.5 - 2.9, 4.3 - 4.5 seconds, A young child speaks briefly. 0.3 - 10.0 seconds, "
    "Conversations fill the space. 0.2 - 0.4 seconds, A cough interrupts the ongoing dialogue."
)

GROUNDING_INTERVALS = [(0.2, 2.7), (3.3, 5.7), (6.5, 7.2)]
GROUNDING_TEXT = "The given query happens in 0.2 - 2.7, 3.3 - 5.7, 6.5 - 7.2 seconds."

SUMMARY_RECORD = SampleRecord(
    "summary-example",
    120.5,
    Task.SUMMARIZATION,
    [
        EventAnnotation([(0.0, 16.4)], "Vice Adm. Jan Tighe takes over as head of  U.S. Fleet Cyber "
                                       "Command, U.S. 10th Fleet."),
        EventAnnotation([(16.4, 84.5)], "She succeeds Adm. Michael Rogers, who moved on to become the "
                                        "NSA director."),
        EventAnnotation([(84.5, 120.5)], "The Navy, other branches have faced criticism for the "
                                         "treatment of female personnel."),
    ],
)
SUMMARY_TEXT = (
    "0.0 - 16.4, Vice Adm. Jan Tighe takes over as head of  U.S. Fleet Cyber Command, U.S. 10th Fleet. "
    "16.4 - 84.5, She succeeds Adm. Michael Rogers, who moved on to become the NSA director. "
    "84.5 - 120.5, The Navy, other branches have faced criticism for the treatment of female personnel."
)

WORDS = (
    "a the dog barks loudly while music plays softly and people talk in background engine hums "
    "bird sings water flows door slams child laughs crowd cheers wind blows gently rain falls"
).split()


def random_caption(rng) -> str:
    words = [WORDS[i] for i in rng.integers(0, len(WORDS), rng.integers(1, 9))]
    words[0] = words[0].capitalize()
    return " ".join(words) + "."


def random_intervals(rng, n, duration_tenths):
    pts = sorted(rng.choice(duration_tenths + 1, size=2 * n, replace=True).tolist())
    return [(pts[2 * i] / 10, pts[2 * i + 1] / 10) for i in range(n)]


def random_record(rng, task: Task, idx: int = 0) -> SampleRecord:
    dur_tenths = int(rng.integers(10, 3000))
    duration = dur_tenths / 10
    if task is Task.SUMMARIZATION:
        n = int(rng.integers(0, 5))
        cuts = sorted(set(rng.integers(0, dur_tenths + 1, n + 1).tolist()))
        events = [EventAnnotation([(a / 10, b / 10)], random_caption(rng)) for a, b in zip(cuts, cuts[1:])]
    elif task is Task.GROUNDING:
        events = [EventAnnotation(random_intervals(rng, int(rng.integers(1, 4)), dur_tenths))]
    else:
        events = [
            EventAnnotation(random_intervals(rng, int(rng.integers(1, 4)), dur_tenths), random_caption(rng))
            for _ in range(int(rng.integers(0, 5)))
        ]
    return SampleRecord(f"{task.value}-{idx}", duration, task, events,
                        query="a query" if task is Task.GROUNDING else None)


def random_interval_set(rng, max_n=4, horizon=30.0):
    n = int(rng.integers(0, max_n + 1))
    out = []
    for _ in range(n):
        s = round(float(rng.uniform(0, horizon)), 3)
        out.append((s, round(s + float(rng.uniform(0, horizon / 3)), 3)))
    return out


def random_text(rng, vocab=("the", "cat", "dog", "sat", "on", "mat", "a", "Bird!", "sings,"), max_len=8):
    return " ".join(vocab[i] for i in rng.integers(0, len(vocab), rng.integers(0, max_len + 1)))


def random_events(rng, max_n=5, labels=("speech", "music", "dog")):
    """Events on a coarse grid so collar boundaries are hit often."""
    out = []
    for _ in range(int(rng.integers(0, max_n + 1))):
        s = int(rng.integers(0, 40)) / 10
        out.append((s, s + int(rng.integers(1, 30)) / 10, labels[int(rng.integers(0, len(labels)))]))
    return out
