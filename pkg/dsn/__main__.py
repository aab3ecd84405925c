import sys

from dsn.app import main

sys.exit(main())
