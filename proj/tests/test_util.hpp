#pragma once

#include <gtest/gtest.h>

#include "phrasespec/core.hpp"

namespace phrasespec::testing_util {

template <typename Fn>
ErrorCode error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no phrasespec::Error thrown";
  return ErrorCode::kIo;
}

}  // namespace phrasespec::testing_util
