import sys

from streamad.cli import main

sys.exit(main())
