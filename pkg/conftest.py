collect_ignore = []
try:
    # The bare name can resolve to the source directory as an empty
    # namespace package, so probe for an actual module of the install.
    import corpus_checker.checker  # noqa: F401
except ImportError:
    # The checker is an optional, separately installed package; the main
    # suite must run without it.
    collect_ignore.append("corpus_checker")
