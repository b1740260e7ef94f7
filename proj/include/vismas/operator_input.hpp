#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vismas {

/// One operator command: planar direction and turn sign, each in [-1, 1].
struct OperatorSample {
    double vx = 0.0;
    double vy = 0.0;
    double omega = 0.0;

    constexpr bool operator==(const OperatorSample&) const = default;
};

/// Source of operator commands for the operator agent.
class OperatorInput {
public:
    virtual ~OperatorInput() = default;
    /// Command in force at `tick`, if any.
    virtual std::optional<OperatorSample> sample_at(std::uint64_t tick) const = 0;
};

/// Scripted operator: each entry holds until the next one.
class OperatorScript final : public OperatorInput {
public:
    struct Entry {
        std::uint64_t tick = 0;
        OperatorSample sample;

        bool operator==(const Entry&) const = default;
    };

    OperatorScript() = default;
    /// Throws InputError when ticks decrease.
    explicit OperatorScript(std::vector<Entry> entries);

    /// Parses `tick vx vy omega` lines; `#` starts a comment. Errors carry `origin:line`.
    static OperatorScript parse(std::string_view text, const std::string& origin = "<script>");
    static OperatorScript load(const std::filesystem::path& path);

    std::string to_text() const;

    std::optional<OperatorSample> sample_at(std::uint64_t tick) const override;

    const std::vector<Entry>& entries() const { return entries_; }
    bool operator==(const OperatorScript& o) const { return entries_ == o.entries_; }

private:
    std::vector<Entry> entries_;
};

/// Live operator input fed at tick boundaries. The most recent sample wins and
/// is dropped once it is `staleness_ticks` old.
class LiveInput final : public OperatorInput {
public:
    explicit LiveInput(std::uint64_t staleness_ticks = 1) : staleness_(staleness_ticks) {}

    /// Stores the sample stamped with `tick`. Non-finite or out-of-range
    /// samples are ignored and counted; returns whether it was accepted.
    bool submit(const OperatorSample& sample, std::uint64_t tick);

    /// Counts a message that could not even be decoded into a sample.
    void reject() { rejected_.fetch_add(1); }

    std::optional<OperatorSample> sample_at(std::uint64_t tick) const override;

    std::uint64_t rejected_count() const { return rejected_.load(); }
    void set_staleness(std::uint64_t ticks) { staleness_.store(ticks == 0 ? 1 : ticks); }

private:
    mutable std::mutex mutex_;
    std::optional<std::pair<std::uint64_t, OperatorSample>> latest_;
    std::atomic<std::uint64_t> staleness_;
    std::atomic<std::uint64_t> rejected_{0};
};

} // namespace vismas
