// Scans a null-terminated option string of comma-separated entries.
#include <stddef.h>

int opt_count(nt_array_ptr(char) s acount(len), size_t len) _Checked {
  int count = 0;
  size_t i = 0;
  if (s[0] == 0) {
    return 0;
  }
  count = 1;
  while (s[i] != 0) {
    if (s[i] == ',') {
      count = count + 1;
    }
    i = i + 1;
  }
  return count;
}

int opt_value(nt_array_ptr(char) s acount(len), size_t len, int index) _Checked {
  int current = 0;
  size_t i = 0;
  int value = 0;
  int seen_digit = 0;
  while (s[i] != 0) {
    char c = s[i];
    if (c == ',') {
      if (current == index && seen_digit) {
        return value;
      }
      current = current + 1;
      value = 0;
      seen_digit = 0;
    }
    if (c >= '0') {
      if (c <= '9') {
        value = value * 10 + (c - '0');
        seen_digit = 1;
      }
    }
    i = i + 1;
  }
  if (current == index && seen_digit) {
    return value;
  }
  return -1;
}

int opt_terminate(nt_array_ptr(char) s acount(len), size_t len) _Checked {
  // re-assert the terminator; writing zero at the slot is always legal
  s[len] = 0;
  return 0;
}
