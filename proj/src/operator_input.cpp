#include "vismas/operator_input.hpp"

#include "vismas/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vismas {

OperatorScript::OperatorScript(std::vector<Entry> entries) : entries_(std::move(entries))
{
    for (std::size_t i = 1; i < entries_.size(); ++i) {
        if (entries_[i].tick < entries_[i - 1].tick) {
            throw InputError("operator script ticks must be non-decreasing");
        }
    }
}

OperatorScript OperatorScript::parse(std::string_view text, const std::string& origin)
{
    std::vector<Entry> entries;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream fields(line);
        std::string first;
        if (!(fields >> first)) {
            continue;
        }
        const std::string where = origin + ":" + std::to_string(line_no);
        Entry entry;
        try {
            std::size_t used = 0;
            const long long tick = std::stoll(first, &used);
            if (used != first.size() || tick < 0) {
                throw std::invalid_argument(first);
            }
            entry.tick = static_cast<std::uint64_t>(tick);
        } catch (const std::exception&) {
            throw InputError(where + ": expected a non-negative tick, got '" + first + "'");
        }
        if (!(fields >> entry.sample.vx >> entry.sample.vy >> entry.sample.omega)) {
            throw InputError(where + ": expected 'tick vx vy omega'");
        }
        std::string extra;
        if (fields >> extra) {
            throw InputError(where + ": unexpected trailing field '" + extra + "'");
        }
        if (!entries.empty() && entry.tick < entries.back().tick) {
            throw InputError(where + ": ticks must be non-decreasing");
        }
        entries.push_back(entry);
    }
    return OperatorScript(std::move(entries));
}

OperatorScript OperatorScript::load(const std::filesystem::path& path)
{
    std::ifstream file(path);
    if (!file) {
        throw InputError("cannot open operator script " + path.string());
    }
    std::stringstream buffer;
    buffer << file.rdbuf();
    return parse(buffer.str(), path.string());
}

std::string OperatorScript::to_text() const
{
    std::ostringstream out;
    out.precision(17);
    out << "# tick vx vy omega\n";
    for (const Entry& e : entries_) {
        out << e.tick << ' ' << e.sample.vx << ' ' << e.sample.vy << ' ' << e.sample.omega << '\n';
    }
    return out.str();
}

std::optional<OperatorSample> OperatorScript::sample_at(std::uint64_t tick) const
{
    auto after = std::upper_bound(entries_.begin(), entries_.end(), tick,
                                  [](std::uint64_t t, const Entry& e) { return t < e.tick; });
    if (after == entries_.begin()) {
        return std::nullopt;
    }
    return std::prev(after)->sample;
}

bool LiveInput::submit(const OperatorSample& sample, std::uint64_t tick)
{
    for (double v : {sample.vx, sample.vy, sample.omega}) {
        if (!std::isfinite(v) || std::abs(v) > 1.0) {
            reject();
            return false;
        }
    }
    std::lock_guard lock(mutex_);
    latest_ = std::make_pair(tick, sample);
    return true;
}

std::optional<OperatorSample> LiveInput::sample_at(std::uint64_t tick) const
{
    std::lock_guard lock(mutex_);
    if (!latest_ || tick < latest_->first || tick - latest_->first >= staleness_.load()) {
        return std::nullopt;
    }
    return latest_->second;
}

} // namespace vismas
