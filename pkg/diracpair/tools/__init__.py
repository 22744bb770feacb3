"""Command line tools: manifests, the diracctl command and the corpus."""
