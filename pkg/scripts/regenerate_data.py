"""Rebuild the bundled data files and print their SHA-256 digests.

    python scripts/regenerate_data.py [DATA_DIR]

Digests that differ from ``casegen.EXPECTED_SHA256`` mean the scan or the
grouping changed; update the constants only after reviewing the diff.
"""

import sys

from singmod import casegen


def main():
    target = sys.argv[1] if len(sys.argv) > 1 else casegen.default_data_dir()
    digests = casegen.write_data_files(target)
    for source_id, digest in digests.items():
        status = "ok" if digest == casegen.EXPECTED_SHA256[source_id] else "CHANGED"
        print(f"{source_id}\t{digest}\t{status}")


if __name__ == "__main__":
    main()
