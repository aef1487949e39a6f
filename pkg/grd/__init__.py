from . import dynamics
from . import fell
from . import groupoid
from . import growth
from . import multipliers
from . import partial_actions
from . import rd
from . import reduction
from . import report
from . import sections
from . import words
from .fell import build_bundle
from .groupoid import build
from .report import CheckReport


__version__ = '0.1.0'
