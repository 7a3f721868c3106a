#pragma once

#include <cassert>
#include <utility>
#include <variant>

namespace webrl::util {

// Minimal expected<T, E>. std::expected lands in C++23; this covers the
// value-or-error shape we need without pulling in a dependency.
// T and E must be distinct types.
template <class T, class E>
class Expected {
 public:
  Expected(T value) : data_(std::in_place_index<0>, std::move(value)) {}
  Expected(E error) : data_(std::in_place_index<1>, std::move(error)) {}

  bool has_value() const { return data_.index() == 0; }
  explicit operator bool() const { return has_value(); }

  T& value() {
    assert(has_value());
    return std::get<0>(data_);
  }
  const T& value() const {
    assert(has_value());
    return std::get<0>(data_);
  }
  E& error() {
    assert(!has_value());
    return std::get<1>(data_);
  }
  const E& error() const {
    assert(!has_value());
    return std::get<1>(data_);
  }

  T& operator*() { return value(); }
  const T& operator*() const { return value(); }
  T* operator->() { return &value(); }
  const T* operator->() const { return &value(); }

 private:
  std::variant<T, E> data_;
};

}  // namespace webrl::util
