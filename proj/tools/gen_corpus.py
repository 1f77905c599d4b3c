#!/usr/bin/env python3
"""Writes data/mock_completions.json and data/corpus.jsonl.

Both files come from the fault programs below. The corpus pairs every
completion with the behavior it was written to exhibit; the test suite
checks that the classifier recovers that label for each record.
"""

import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent
DATA = ROOT / "data"

# Mock Nonsense templates. Each opens with an import line, the most common
# format violation; what follows varies.
NONSENSE_TEMPLATES = [
    "import numpy as np\n{golden}",
    "from env_utils import execute\nfrom perception_utils import parse_query_obj\n{golden}",
    "import numpy as np\nHere is the policy code for the task:\n{golden}",
    "import math\n```python\n{golden}```\n",
    "import numpy as np\n{golden}This code first locates the object and then completes the manipulation step by step.\n",
]

# Corpus-only Nonsense variants without a leading import.
EXTRA_NONSENSE = [
    "Here is the policy code for the task:\n{golden}",
    "Sure! Below is the code.\n```python\n{golden}```\n",
    "{golden}This code first locates the object and then completes the manipulation step by step.\n",
    "{golden}import numpy as np\n",
    "def run():\n{golden}",
    "{golden_first}composer(\"carefully finish the task\")\n",
]
REFUSAL_AT_LOW_LEVEL = "I cannot complete this manipulation because the instruction does not say what to do with the object."

REFUSAL = "I cannot complete this manipulation; the {target} lies outside the executable space."

GOLDEN = {}

FAULTS = {
    "Grasp": {
        "Disorder": [
            ["grasp the block", "move to the top of the block", "back to default pose"],
            ["grasp the block", "back to default pose"],
            ["move to the top of the block", "back to default pose"],
            ["move to the top of the block", "grasp the cube", "back to default pose"],
            ["back to default pose", "grasp the block", "move to the block"],
            ["move to the top of the block", "open gripper", "back to default pose"],
            ["pick up the block", "move to the top of the block"],
        ],
        "Infeasible": [
            ["move 120 units above the block", "move to the top of the block", "grasp the block", "back to default pose"],
            ["move 100 units to the left of the block", "move to the top of the block", "grasp the block", "back to default pose"],
            ["move 100 units to the right of the block", "move to the top of the block", "grasp the block", "back to default pose"],
            ["move 100 units in front of the block", "move to the top of the block", "grasp the block", "back to default pose"],
            ["move 100 units behind the block", "move to the top of the block", "grasp the block", "back to default pose"],
            ["move 150 units above the block", "grasp the block", "back to default pose"],
            ["move to the top of the block", "grasp the block", "back to default pose", "move 130 units above the block"],
        ],
        "Badpose": [
            ["move to the left of the block", "grasp the block", "back to default pose"],
            ["move to the right of the block", "grasp the block", "back to default pose"],
            ["move to the front of the block", "grasp the block", "back to default pose"],
            ["move to the back of the block", "grasp the block", "back to default pose"],
            ["move 10 units to the left of the block", "grasp the block", "back to default pose"],
            ["move 8 units behind the block", "grasp the block", "back to default pose"],
            ["move 12 units in front of the block", "grasp the block", "back to default pose"],
        ],
    },
    "Movement": {
        "Disorder": [
            ["back to default pose"],
            ["open gripper", "close gripper"],
            ["move to the top of the cube"],
            ["move to the top of the table"],
            ["rotate by 90 degrees"],
            ["close gripper", "back to default pose"],
            ["move to the top of the box"],
        ],
        "Infeasible": [
            ["move 120 units above the block"],
            ["move 100 units to the left of the block"],
            ["move 100 units to the right of the block"],
            ["move 100 units in front of the block"],
            ["move 100 units behind the block"],
            ["go 110 units to the right of the block"],
            ["move to the top of the block", "move 150 units above the block"],
        ],
        "Badpose": [
            ["move to the block"],
            ["go to the block"],
            ["approach the block"],
            ["move to the left of the block"],
            ["move to the right of the block"],
            ["move to the front of the block", "move to the block"],
            ["move to the top of the block", "move to the block"],
        ],
    },
    "Rotation": {
        "Disorder": [
            ["rotate the gripper by 90 degrees", "move to the top of the block"],
            ["rotate the gripper by 90 degrees"],
            ["move to the top of the block"],
            ["turn the gripper by 90 degrees", "move to the block"],
            ["move to the top of the cube", "rotate by 90 degrees"],
            ["rotate by 45 degrees", "rotate by 45 degrees", "move to the top of the block"],
            ["back to default pose", "rotate by 90 degrees", "move to the top of the block"],
        ],
        "Infeasible": [
            ["move 120 units above the block", "move to the top of the block", "rotate the gripper by 90 degrees"],
            ["move 100 units to the left of the block", "move to the top of the block", "rotate the gripper by 90 degrees"],
            ["move 100 units to the right of the block", "rotate the gripper by 90 degrees"],
            ["move 100 units in front of the block", "rotate the gripper by 90 degrees"],
            ["move 100 units behind the block", "rotate the gripper by 90 degrees"],
            ["move 150 units above the block", "rotate the gripper by 90 degrees"],
            ["move to the top of the block", "rotate the gripper by 90 degrees", "move 120 units above the block"],
        ],
        "Badpose": [
            ["move to the top of the block", "rotate the gripper by 45 degrees"],
            ["move to the top of the block", "rotate the gripper by 180 degrees"],
            ["move to the top of the block", "rotate the gripper clockwise by 90 degrees"],
            ["move to the block", "rotate the gripper by 90 degrees"],
            ["move to the left of the block", "rotate the gripper by 90 degrees"],
            ["move to the top of the block", "rotate by 90 degrees", "move to the block"],
            ["move to the top of the block", "rotate by 30 degrees", "rotate by 30 degrees"],
        ],
    },
    "SlideBlockToTarget": {
        "Disorder": [
            ["move to the target", "move to the block"],
            ["move to the target"],
            ["move to the block"],
            ["move to the top of the target", "move to the block", "move to the target"],
            ["move to the block", "move to the goal"],
            ["go to the target", "go to the block"],
            ["move to the block", "back to default pose"],
        ],
        "Infeasible": [
            ["move 120 units above the block", "move to the block", "move to the target"],
            ["move 100 units to the left of the block", "move to the block", "move to the target"],
            ["move 100 units to the right of the block", "move to the block", "move to the target"],
            ["move 100 units in front of the block", "move to the block", "move to the target"],
            ["move 100 units behind the block", "move to the block", "move to the target"],
            ["move to the block", "move to the target", "move 100 units to the left of the target"],
            ["move to the block", "move to the target", "move 130 units above the target"],
        ],
        "Badpose": [
            ["move to the top of the block", "move to the target"],
            ["move to the block", "move to the left of the target"],
            ["move to the block", "move to the right of the target"],
            ["move to the block", "move to the front of the target"],
            ["move to the block", "move to the back of the target"],
            ["move to the top of the block", "move to the top of the target"],
            ["move to the block", "move 15 units behind the target"],
        ],
    },
    "ChangeClock": {
        "Disorder": [
            ["move to the front of the clock hand", "rotate the clock hand by 90 degrees", "grasp the clock hand", "open gripper"],
            ["move to the front of the clock hand", "grasp the clock hand", "open gripper", "rotate the clock hand by 90 degrees"],
            ["move to the front of the clock hand", "grasp the clock hand", "rotate the clock hand by 90 degrees"],
            ["move to the front of the clock hand", "open gripper", "grasp the clock hand", "rotate the clock hand by 90 degrees"],
            ["move to the front of the minute hand", "grasp the minute hand", "rotate the minute hand by 90 degrees", "open gripper"],
            ["rotate by 90 degrees", "move to the front of the clock hand", "grasp the clock hand", "open gripper"],
            ["move to the front of the clock hand", "rotate by 90 degrees", "open gripper"],
        ],
        "Infeasible": [
            ["move 120 units above the clock hand", "move to the front of the clock hand", "grasp the clock hand", "rotate the clock hand by 90 degrees", "open gripper"],
            ["move 100 units to the left of the clock", "move to the front of the clock hand", "grasp the clock hand", "rotate the clock hand by 90 degrees", "open gripper"],
            ["move 100 units to the right of the clock", "move to the front of the clock hand", "grasp the clock hand", "rotate the clock hand by 90 degrees", "open gripper"],
            ["move 100 units in front of the clock hand", "grasp the clock hand", "rotate the clock hand by 90 degrees", "open gripper"],
            ["move 100 units behind the clock", "move to the front of the clock hand", "grasp the clock hand", "rotate the clock hand by 90 degrees", "open gripper"],
            ["move 150 units above the clock", "move to the front of the clock hand", "grasp the clock hand", "rotate the clock hand by 90 degrees", "open gripper"],
            ["move to the front of the clock hand", "grasp the clock hand", "rotate the clock hand by 90 degrees", "open gripper", "move 120 units above the clock"],
        ],
        "Badpose": [
            ["move to the top of the clock hand", "grasp the clock hand", "rotate the clock hand by 90 degrees", "open gripper"],
            ["move to the left of the clock hand", "grasp the clock hand", "rotate the clock hand by 90 degrees", "open gripper"],
            ["move to the right of the clock hand", "grasp the clock hand", "rotate the clock hand by 90 degrees", "open gripper"],
            ["move to the back of the clock hand", "grasp the clock hand", "rotate the clock hand by 90 degrees", "open gripper"],
            ["grasp the clock hand", "rotate the clock hand by 90 degrees", "open gripper"],
            ["move to the front of the clock hand", "grasp the clock hand", "rotate the clock hand by 10 degrees", "open gripper"],
            ["move 5 units above the clock hand", "grasp the clock hand", "rotate the clock hand by 90 degrees", "open gripper"],
        ],
    },
    "LightBulbOut": {
        "Disorder": [
            ["move to the top of the holder", "move to the top of the bulb", "grasp the bulb", "rotate the bulb by 90 degrees", "open gripper"],
            ["move to the top of the bulb", "grasp the bulb", "rotate the bulb by 90 degrees", "back to default pose", "open gripper", "move to the top of the holder"],
            ["move to the top of the bulb", "rotate the bulb by 90 degrees", "grasp the bulb", "back to default pose", "move to the top of the holder", "open gripper"],
            ["move to the top of the bulb", "grasp the bulb", "back to default pose", "move to the top of the holder", "open gripper"],
            ["move to the top of the bulb", "grasp the bulb", "rotate the bulb by 90 degrees", "back to default pose", "move to the top of the holder"],
            ["move to the top of the lamp", "grasp the bulb", "rotate the bulb by 90 degrees", "back to default pose", "move to the top of the holder", "open gripper"],
            ["move to the top of the bulb", "open gripper", "grasp the bulb", "rotate the bulb by 90 degrees", "move to the top of the holder"],
        ],
        "Infeasible": [
            ["move 120 units above the bulb", "move to the top of the bulb", "grasp the bulb", "rotate the bulb by 90 degrees", "back to default pose", "move to the top of the holder", "open gripper"],
            ["move 100 units to the left of the bulb", "move to the top of the bulb", "grasp the bulb", "rotate the bulb by 90 degrees", "back to default pose", "move to the top of the holder", "open gripper"],
            ["move 100 units to the right of the bulb", "move to the top of the bulb", "grasp the bulb", "rotate the bulb by 90 degrees", "back to default pose", "move to the top of the holder", "open gripper"],
            ["move 100 units in front of the bulb", "move to the top of the bulb", "grasp the bulb", "rotate the bulb by 90 degrees", "back to default pose", "move to the top of the holder", "open gripper"],
            ["move 100 units behind the bulb", "move to the top of the bulb", "grasp the bulb", "rotate the bulb by 90 degrees", "back to default pose", "move to the top of the holder", "open gripper"],
            ["move to the top of the bulb", "grasp the bulb", "rotate the bulb by 90 degrees", "back to default pose", "move 120 units above the holder", "open gripper"],
            ["move to the top of the bulb", "grasp the bulb", "rotate the bulb by 90 degrees", "back to default pose", "move 100 units behind the holder", "open gripper"],
        ],
        "Badpose": [
            ["move to the left of the bulb", "grasp the bulb", "rotate the bulb by 90 degrees", "back to default pose", "move to the top of the holder", "open gripper"],
            ["move to the right of the bulb", "grasp the bulb", "rotate the bulb by 90 degrees", "back to default pose", "move to the top of the holder", "open gripper"],
            ["move to the front of the bulb", "grasp the bulb", "rotate the bulb by 90 degrees", "back to default pose", "move to the top of the holder", "open gripper"],
            ["move to the back of the bulb", "grasp the bulb", "rotate the bulb by 90 degrees", "back to default pose", "move to the top of the holder", "open gripper"],
            ["move to the top of the bulb", "grasp the bulb", "rotate the bulb by 90 degrees", "back to default pose", "move to the left of the holder", "open gripper"],
            ["move to the top of the bulb", "grasp the bulb", "rotate the bulb by 20 degrees", "back to default pose", "move to the top of the holder", "open gripper"],
            ["move 10 units in front of the bulb", "grasp the bulb", "rotate the bulb by 90 degrees", "back to default pose", "move to the top of the holder", "open gripper"],
        ],
    },
    "PutRubbishInBin": {
        "Disorder": [
            ["grasp the rubbish", "open gripper", "move to the bin"],
            ["grasp the rubbish", "back to default pose", "open gripper", "move to the top of the bin"],
            ["move to the top of the bin", "move to the top of the rubbish", "grasp the rubbish", "open gripper"],
            ["move to the top of the rubbish", "grasp the rubbish", "back to default pose", "move to the top of the bin"],
            ["move to the top of the rubbish", "back to default pose", "move to the top of the bin", "open gripper"],
            ["move to the top of the rubbish", "grasp the rubbish", "back to default pose", "move to the top of the trash can", "open gripper"],
            ["open gripper", "move to the top of the rubbish", "grasp the rubbish", "back to default pose", "move to the top of the bin"],
        ],
        "Infeasible": [
            ["move 120 units above the rubbish", "move to the top of the rubbish", "grasp the rubbish", "back to default pose", "move to the top of the bin", "open gripper"],
            ["move 100 units to the left of the rubbish", "move to the top of the rubbish", "grasp the rubbish", "back to default pose", "move to the top of the bin", "open gripper"],
            ["move 100 units to the right of the tomato1", "move to the top of the rubbish", "grasp the rubbish", "back to default pose", "move to the top of the bin", "open gripper"],
            ["move 100 units in front of the rubbish", "move to the top of the rubbish", "grasp the rubbish", "back to default pose", "move to the top of the bin", "open gripper"],
            ["move to the top of the rubbish", "grasp the rubbish", "back to default pose", "move 120 units above the bin", "open gripper"],
            ["move to the top of the rubbish", "grasp the rubbish", "back to default pose", "move 100 units behind the bin", "open gripper"],
            ["move to the top of the rubbish", "grasp the rubbish", "back to default pose", "move 100 units to the left of the bin", "open gripper"],
        ],
        "Badpose": [
            ["move to the top of the rubbish", "grasp the rubbish", "back to default pose", "move to the bin", "open gripper"],
            ["move to the top of the rubbish", "grasp the rubbish", "back to default pose", "move to the left of the bin", "open gripper"],
            ["move to the top of the rubbish", "grasp the rubbish", "back to default pose", "move to the right of the bin", "open gripper"],
            ["move to the top of the rubbish", "grasp the rubbish", "back to default pose", "move to the front of the bin", "open gripper"],
            ["move to the top of the rubbish", "grasp the rubbish", "back to default pose", "move to the tomato1", "move to the top of the bin", "open gripper"],
            ["move to the top of the rubbish", "grasp the rubbish", "back to default pose", "move to the tomato2", "move to the top of the bin", "open gripper"],
            ["move to the top of the rubbish", "grasp the rubbish", "back to default pose", "move to the top of the bin", "move to the bin", "open gripper"],
        ],
    },
    "OpenWineBottle": {
        "Disorder": [
            ["grasp the cap", "move to the top of the cap", "rotate the cap by 90 degrees", "back to default pose"],
            ["move to the top of the cap", "rotate the cap by 90 degrees", "grasp the cap", "back to default pose"],
            ["move to the top of the cap", "grasp the cap", "back to default pose", "rotate the cap by 90 degrees"],
            ["move to the top of the cap", "grasp the cap", "back to default pose"],
            ["move to the top of the cap", "grasp the cap", "rotate the cap by 90 degrees"],
            ["move to the top of the cork", "grasp the cork", "rotate the cork by 90 degrees", "back to default pose"],
            ["back to default pose", "move to the top of the cap", "grasp the cap", "rotate the cap by 90 degrees"],
        ],
        "Infeasible": [
            ["move 120 units above the cap", "move to the top of the cap", "grasp the cap", "rotate the cap by 90 degrees", "back to default pose"],
            ["move 100 units to the left of the cap", "move to the top of the cap", "grasp the cap", "rotate the cap by 90 degrees", "back to default pose"],
            ["move 100 units to the right of the bottle", "move to the top of the cap", "grasp the cap", "rotate the cap by 90 degrees", "back to default pose"],
            ["move 100 units in front of the cap", "move to the top of the cap", "grasp the cap", "rotate the cap by 90 degrees", "back to default pose"],
            ["move 100 units behind the bottle", "move to the top of the cap", "grasp the cap", "rotate the cap by 90 degrees", "back to default pose"],
            ["move 150 units above the cap", "grasp the cap", "rotate the cap by 90 degrees", "back to default pose"],
            ["move to the top of the cap", "grasp the cap", "rotate the cap by 90 degrees", "back to default pose", "move 120 units above the bottle"],
        ],
        "Badpose": [
            ["move to the left of the cap", "grasp the cap", "rotate the cap by 90 degrees", "back to default pose"],
            ["move to the right of the cap", "grasp the cap", "rotate the cap by 90 degrees", "back to default pose"],
            ["move to the front of the cap", "grasp the cap", "rotate the cap by 90 degrees", "back to default pose"],
            ["move to the back of the cap", "grasp the cap", "rotate the cap by 90 degrees", "back to default pose"],
            ["move to the top of the cap", "grasp the cap", "rotate the cap by 20 degrees", "back to default pose"],
            ["move to the bottle", "move to the top of the cap", "grasp the cap", "rotate the cap by 90 degrees", "back to default pose"],
            ["move 10 units to the left of the cap", "grasp the cap", "rotate the cap by 90 degrees", "back to default pose"],
        ],
    },
}


def program_text(objects, steps):
    head = "objects = [" + ", ".join(f"'{o}'" for o in objects) + "]\n"
    return head + "".join(f'composer("{s}")\n' for s in steps)


def main():
    scenes = json.loads((DATA / "scenes.json").read_text())["scenes"]
    levels = ["A", "P", "C"]
    records = []
    for scene in scenes:
        task = scene["task"]
        objects = [o["name"] for o in scene["objects"]]
        golden = program_text(objects, scene["golden"])
        golden_first = program_text(objects, scene["golden"][:1])
        nonsense = [t.replace("{golden}", golden) for t in NONSENSE_TEMPLATES]
        nonsense += [t.replace("{golden_first}", golden_first).replace("{golden}", golden) for t in EXTRA_NONSENSE]
        per_task = [("Nonsense", text, levels[i % 3]) for i, text in enumerate(nonsense)]
        per_task.append(("Nonsense", REFUSAL_AT_LOW_LEVEL, "A"))
        for behavior in ("Disorder", "Infeasible", "Badpose"):
            for i, steps in enumerate(FAULTS[task][behavior]):
                per_task.append((behavior, program_text(objects, steps), levels[i % 3]))
        for i, (label, text, level) in enumerate(per_task):
            records.append({
                "id": f"{task}-{label}-{i:02d}",
                "task": task,
                "level": level,
                "seed": 1000 + len(records),
                "label": label,
                "text": text,
            })

    with open(DATA / "corpus.jsonl", "w", encoding="utf-8", newline="\n") as f:
        for r in records:
            f.write(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n")

    mock = {
        "schema": 1,
        "description": "Canned faulty completions for the mock backend. `nonsense` templates wrap the task's golden program ({golden}); per-task entries are composer step lists rendered under the scene's objects line.",
        "nonsense": NONSENSE_TEMPLATES,
        "refusal": REFUSAL,
        "tasks": FAULTS,
    }
    (DATA / "mock_completions.json").write_text(json.dumps(mock, indent=2, ensure_ascii=False) + "\n")
    print(f"wrote {len(records)} corpus records")


if __name__ == "__main__":
    main()
