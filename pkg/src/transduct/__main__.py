import sys

from transduct.cli import main

sys.exit(main())
