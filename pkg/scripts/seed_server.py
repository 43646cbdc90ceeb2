#!/usr/bin/env python3
"""Start the HTTP API on a store seeded with the standard demo fixture.

The fixture contains the implication pair (AB -> A) and the 10-object /
2-intersection setup where applying ``Pr(A|B) >= 0.5`` adds exactly six
virtual objects, so the workbench can be exercised against known numbers.

    python scripts/seed_server.py [--port 8420] [--save FILE]
"""

import argparse

from classalgebra import document
from classalgebra.model import Store
from classalgebra.server import serve


def seeded_store() -> Store:
    store = Store()
    for i in range(10):
        attrs = {"b": [1], "name": [f"obj{i}"]}
        if i < 2:
            attrs["a"] = [1]
        store.create_object(attrs)
    store.define_class("A", "any where a=1")
    store.define_class("B", "any where b=1")
    store.define_class("AB", "A*B")
    return store


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--port", type=int, default=8420)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--save", metavar="FILE", help="also write the seed as a document")
    args = parser.parse_args()
    store = seeded_store()
    if args.save:
        document.save(store, args.save)
    print(f"serving seeded ontology on http://{args.host}:{args.port}")
    serve(store, args.port, args.host)


if __name__ == "__main__":
    main()
