# monodromy_utils package
