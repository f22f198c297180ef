"""The zero-shot code-completion prompt wrapping a method for inference.

The template is fixed and emitted bit-exactly: two instruction lines, a
blank line, "Code:", a newline, and the code wrapped tightly in backtick
fences. When the code itself contains a backtick run the fence is
lengthened past it so the fences stay balanced; callers can surface that
through the returned metadata.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

INSTRUCTION_LINE_1 = "Recommend the optimal log statements in the following given codes."
INSTRUCTION_LINE_2 = (
    "You need to output the full code with optimal log statement inserted, "
    "and do not explain the reason."
)


@dataclass(frozen=True)
class RenderedPrompt:
    text: str
    fence: str

    @property
    def fence_extended(self):
        return len(self.fence) > 3


def _fence_for(code):
    longest = max((len(m.group()) for m in re.finditer(r"`+", code)), default=0)
    return "`" * max(3, longest + 1)


def render_prompt(code):
    """Template text plus fence metadata."""
    if not code:
        raise ValueError("code must be non-empty")
    fence = _fence_for(code)
    text = (
        f"{INSTRUCTION_LINE_1}\n"
        f"{INSTRUCTION_LINE_2}\n"
        "\n"
        "Code:\n"
        f"{fence}{code}{fence}"
    )
    return RenderedPrompt(text=text, fence=fence)


def build_prompt(code):
    """The prompt string for a code snippet; identical input, identical output."""
    return render_prompt(code).text


def extract_fenced_code(prompt_text):
    """Inverse of render_prompt for round-trip checks: the fenced payload."""
    m = re.search(r"Code:\n(`{3,})(.*)\1$", prompt_text, flags=re.DOTALL)
    if not m:
        raise ValueError("prompt does not contain a fenced code section")
    return m.group(2)
