import random

import pytest

from indexify.garden import load_gardens
from indexify.iot import memoise_all
from indexify.lang.parser import parse
from indexify.lang.typecheck import typecheck

FIG5_GARDEN_TEXT = "0\tstr\tfoobar\n1\tstr\toobar\n2\tstr\tbar\n3\tstr\too\n"

FIG4A_SOURCE = """\
int main() {
  str s1;
  str s2;
  symbolic s1;
  puts(s1);
  s2 = strcat("a", "foo");
  if (strstr(s1, "bar")) {
    return 1;
  }
  return 0;
}
"""


@pytest.fixture
def fig5_gardens():
    return load_gardens(FIG5_GARDEN_TEXT)


@pytest.fixture
def fig5_strstr(fig5_gardens):
    return memoise_all(fig5_gardens, {"strstr"})["i_strstr"]


@pytest.fixture
def fig4a_program():
    return typecheck(parse(FIG4A_SOURCE))


def make_rng(seed: int) -> random.Random:
    return random.Random(seed)
