import sys

from butterfly.cli import main

sys.exit(main())
