from django.contrib import admin

from .models import BenchmarkRun, RmseRow


class RmseRowInline(admin.TabularInline):
    model = RmseRow
    extra = 0
    fields = ("sweep_value", "estimator", "freq_index", "rmse", "crb_sqrt", "acrb_sqrt", "trials", "failures")
    readonly_fields = fields
    can_delete = False


@admin.register(BenchmarkRun)
class BenchmarkRunAdmin(admin.ModelAdmin):
    list_display = ("id", "name", "created_at", "sweep_var", "seed", "trials", "failures")
    list_filter = ("sweep_var", "created_at")
    search_fields = ("name",)
    date_hierarchy = "created_at"
    readonly_fields = ("created_at", "config", "timings")
    inlines = [RmseRowInline]


@admin.register(RmseRow)
class RmseRowAdmin(admin.ModelAdmin):
    list_display = ("run", "sweep_value", "estimator", "freq_index", "rmse", "crb_sqrt", "acrb_sqrt", "get_ratio")
    list_filter = ("estimator", "freq_index")
    search_fields = ("run__name",)

    def get_ratio(self, obj):
        if obj.rmse is None or not obj.crb_sqrt:
            return "—"
        return f"{obj.rmse / obj.crb_sqrt:.2f}"
    get_ratio.short_description = "RMSE / sqrt(CRB)"
