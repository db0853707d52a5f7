#pragma once

#include <functional>
#include <memory>
#include <type_traits>
#include <utility>

namespace fdelay {

// Non-owning reference to a callable. Must not outlive the referenced object;
// intended for parameters only.
template <class Signature>
class FunctionRef;

template <class R, class... Args>
class FunctionRef<R(Args...)> {
 public:
  template <class F>
    requires(!std::is_same_v<std::remove_cvref_t<F>, FunctionRef> &&
             !std::is_function_v<std::remove_reference_t<F>> &&
             !std::is_pointer_v<std::remove_cvref_t<F>> &&
             std::is_invocable_r_v<R, F&, Args...>)
  FunctionRef(F&& f) noexcept  // NOLINT(google-explicit-constructor)
      : object_(const_cast<void*>(static_cast<const void*>(std::addressof(f)))),
        call_([](FunctionRef const* self, Args... args) -> R {
          return std::invoke(*static_cast<std::remove_reference_t<F>*>(self->object_),
                             std::forward<Args>(args)...);
        }) {}

  // Plain functions are stored by pointer; object pointers cannot hold them.
  FunctionRef(R (*fn)(Args...)) noexcept  // NOLINT(google-explicit-constructor)
      : fn_(fn), call_([](FunctionRef const* self, Args... args) -> R {
          return self->fn_(std::forward<Args>(args)...);
        }) {}

  R operator()(Args... args) const { return call_(this, std::forward<Args>(args)...); }

 private:
  union {
    void* object_;
    R (*fn_)(Args...);
  };
  R (*call_)(FunctionRef const*, Args...);
};

}  // namespace fdelay
