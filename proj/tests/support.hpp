#pragma once

// Shared helpers for the test binaries.

#include <map>
#include <memory>
#include <set>
#include <vector>

#include "lims/index.hpp"
#include "lims/query.hpp"
#include "lims/storage.hpp"

namespace lims_test {

inline std::set<std::uint64_t> ids_of(const std::vector<lims::Match>& matches) {
    std::set<std::uint64_t> out;
    for (const auto& m : matches)
        out.insert(m.id);
    return out;
}

/// Page device proxy that records how many times each page was read.
class SpyDevice final : public lims::PageDevice {
public:
    explicit SpyDevice(std::shared_ptr<lims::MemoryPageDevice> inner) : inner_(std::move(inner)) {}

    std::uint32_t page_size() const override { return inner_->page_size(); }
    std::uint64_t page_count() const override { return inner_->page_count(); }
    void read(std::uint64_t page, std::span<std::byte> out) const override {
        ++reads_[page];
        inner_->read(page, out);
    }
    void write(std::uint64_t page, std::span<const std::byte> in) override {
        inner_->write(page, in);
    }
    std::uint64_t append_page() override { return inner_->append_page(); }
    bool writable() const override { return true; }

    mutable std::map<std::uint64_t, std::uint64_t> reads_;

private:
    std::shared_ptr<lims::MemoryPageDevice> inner_;
};

/// Re-homes an index's pages behind a SpyDevice (deep copy of the blob) and
/// returns the spy.
inline std::shared_ptr<SpyDevice> attach_spy(lims::LimsIndex& idx) {
    const auto* mem = dynamic_cast<const lims::MemoryPageDevice*>(&idx.store->device());
    auto copy = std::make_shared<lims::MemoryPageDevice>(idx.config.page_size);
    copy->assign(mem->bytes());
    auto spy = std::make_shared<SpyDevice>(std::move(copy));
    idx.store = std::make_shared<lims::PagedStore>(spy, idx.metric,
                                                   idx.metric == lims::Metric::Edit ? 1 : idx.dim);
    return spy;
}

} // namespace lims_test
