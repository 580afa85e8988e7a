# Explicit permutation groups larger than this abort with GroupTooLarge
max_group_order = 10**6
# Groups up to this order get the full closure check on construction
verify_group_limit = 10000
# Rename fresh ids to @1, @2, ... after every rewrite step
normalize_fresh = False
