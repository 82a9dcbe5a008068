import sys

from vcrank.cli import main

sys.exit(main())
