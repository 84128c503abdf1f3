// Internet-style ones-complement checksum over a byte buffer.
#include <stddef.h>
#include <stdint.h>

unsigned int inet_csum_slice(array_ptr(uint8_t) buf acount(len), size_t len) _Checked {
  unsigned int sum = 0;
  size_t i = 0;
  while (i + 1 < len) {
    sum = sum + ((buf[i] << 8) | buf[i + 1]);
    i = i + 2;
  }
  if (i < len) {
    sum = sum + (buf[i] << 8);
  }
  while ((sum >> 16) != 0) {
    sum = (sum & 65535) + (sum >> 16);
  }
  return sum ^ 65535;
}

int csum_matches(array_ptr(uint8_t) buf acount(len), size_t len, unsigned int expected) _Checked {
  return inet_csum_slice(buf, len) == expected;
}
