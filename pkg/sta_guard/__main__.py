import sys

from sta_guard.cli import main

sys.exit(main())
