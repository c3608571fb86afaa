"""Shared helpers: error types and atomic report writing"""
