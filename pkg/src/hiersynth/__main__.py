import sys

from hiersynth.cli import main

sys.exit(main())
