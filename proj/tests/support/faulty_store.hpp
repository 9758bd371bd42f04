#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>

#include "vrdf/error.hpp"
#include "vrdf/store.hpp"

namespace fixture {

/// Wraps a store and throws StoreError on chosen calls. Updates can fail
/// before reaching the inner store, or after it has applied them (the caller
/// then sees an error for a write that actually landed).
class FaultyStore : public vrdf::Store {
 public:
  enum class Mode { before, after };

  explicit FaultyStore(std::shared_ptr<vrdf::Store> inner) : inner_(std::move(inner)) {}

  /// The n-th update from now (1-based) fails; 0 disarms.
  void fail_update(int n, Mode mode = Mode::before) {
    mode_ = mode;
    updates_until_failure_ = n;
  }
  /// Every select fails while set.
  void fail_selects(bool on) { fail_selects_ = on; }
  /// Called with each update text; may throw to fail selectively.
  std::function<void(const std::string&)> on_update;

  int updates_seen() const { return updates_seen_; }

  vrdf::SelectResult select(std::string_view query) override {
    if (fail_selects_) throw vrdf::StoreError("injected select failure");
    return inner_->select(query);
  }

  void update(std::string_view text) override {
    ++updates_seen_;
    if (on_update) on_update(std::string(text));
    bool fire = updates_until_failure_ > 0 && --updates_until_failure_ == 0;
    if (fire && mode_ == Mode::before) throw vrdf::StoreError("injected update failure");
    inner_->update(text);
    if (fire) throw vrdf::StoreError("injected failure after update applied");
  }

  void load_quads(const vrdf::QuadSet& quads) override { inner_->load_quads(quads); }
  const vrdf::StoreHandle& handle() const override { return inner_->handle(); }

 private:
  std::shared_ptr<vrdf::Store> inner_;
  Mode mode_ = Mode::before;
  std::atomic<int> updates_until_failure_{0};
  std::atomic<int> updates_seen_{0};
  std::atomic<bool> fail_selects_{false};
};

}  // namespace fixture
