// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
//
// Single-binary operator surface; see README for the subcommand reference.
#include <cstdio>

int main() {
  std::puts("loco: placeholder");
  return 0;
}
