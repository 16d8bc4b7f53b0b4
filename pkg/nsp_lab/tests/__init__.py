"""Unit tests for nsp_lab."""
